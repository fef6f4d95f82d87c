import requests
from flask import Flask

app = Flask(__name__)
LEDGER = "http://ledger.internal/entries"


@app.post("/pay")
def pay():
    requests.post(LEDGER, json={})
    return {"ok": True}
