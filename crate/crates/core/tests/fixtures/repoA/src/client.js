const fetch = require("node-fetch");

async function loadItem() {
  const res = await fetch("https://test-service:123/api/456");
  return res.json();
}

module.exports = { loadItem };
