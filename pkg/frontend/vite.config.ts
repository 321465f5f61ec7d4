import react from "@vitejs/plugin-react";
import { defineConfig } from "vitest/config";

// The dev and preview servers forward API calls to a locally running
// `claimlens serve` instance, so the app works same-origin out of the box.
// Point VITE_API_BASE at a remote service to skip the proxy entirely.
const apiProxy = {
  "/v1": { target: "http://127.0.0.1:8000", changeOrigin: true },
};

export default defineConfig({
  plugins: [react()],
  server: { proxy: apiProxy },
  preview: { proxy: apiProxy },
  test: {
    environment: "jsdom",
  },
});
