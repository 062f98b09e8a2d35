import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    // integration tests spawn the Python service and drive real HTTP
    testTimeout: 60000,
    hookTimeout: 60000,
  },
});
