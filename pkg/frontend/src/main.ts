/** Browser entry point: resolve the service base URL, mount the app. */

import { ApiClient } from "./api.js";
import { App } from "./app.js";

const TOKEN_KEY = "health-agents-token";

function resolveBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery) return fromQuery;
  const fromStorage = window.localStorage.getItem("health-agents-base-url");
  if (fromStorage) return fromStorage;
  return "/api";
}

function mount(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const baseUrl = resolveBaseUrl();
  new App(root, (token) => {
    if (token) window.localStorage.setItem(TOKEN_KEY, token);
    const stored = token || window.localStorage.getItem(TOKEN_KEY) || "";
    return new ApiClient(baseUrl, stored);
  });
}

mount();
