import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // service tests run real simulations through a child process
    testTimeout: 120_000,
    hookTimeout: 60_000,
  },
});
