// Browser entry point: mount the app against the service, same origin
// by default, or ?api=http://localhost:8000 to point elsewhere.

import { Client } from "./api.js";
import { createApp } from "./app.js";

const base = new URLSearchParams(window.location.search).get("api") ?? "";
const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");

const app = createApp(root, new Client(base, (url, init) => fetch(url, init)));
app.load().catch((err) => {
  root.innerHTML = `<div class="banner error">cannot reach the service: ${String(err)}</div>`;
});
