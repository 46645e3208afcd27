import { startApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  startApp(root).catch((e: unknown) => {
    root.textContent = `failed to start: ${(e as Error).message}`;
  });
}
