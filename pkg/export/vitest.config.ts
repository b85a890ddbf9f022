import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // integration tests spawn the engine CLI repeatedly
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
