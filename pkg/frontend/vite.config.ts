import { defineConfig } from "vitest/config";

export default defineConfig({
  build: {
    outDir: "dist",
    emptyOutDir: true,
  },
  server: {
    proxy: {
      // dev mode talks to a locally running `hpl serve`
      "/api": "http://127.0.0.1:8080",
    },
  },
  test: {
    environment: "jsdom",
    globalSetup: "./test/globalSetup.ts",
    testTimeout: 30000,
    hookTimeout: 240000,
  },
});
