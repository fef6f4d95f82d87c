#!/usr/bin/env python3
import json, sys

entity = json.load(sys.stdin)["entity"]
entity["$uuids"] = entity["$uuids"] + ["forged"]
json.dump(entity, sys.stdout)
