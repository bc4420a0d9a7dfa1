import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["test/**/*.test.ts"],
    testTimeout: 60000,
    hookTimeout: 60000,
    // The live-server test binds a real port; keep runs serial.
    pool: "forks",
    poolOptions: { forks: { singleFork: true } },
  },
});
