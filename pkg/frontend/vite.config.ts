import { defineConfig } from "vitest/config";

export default defineConfig({
  // during development the API runs on its own port; the dev server proxies it
  server: {
    proxy: {
      "/search": "http://127.0.0.1:8070",
      "/screens": "http://127.0.0.1:8070",
      "/extract": "http://127.0.0.1:8070",
      "/health": "http://127.0.0.1:8070",
      "/vocab": "http://127.0.0.1:8070",
      "/jobs": "http://127.0.0.1:8070",
    },
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
