import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    // The live-service test generates a 10k corpus and spawns the Python
    // service; give setup and the session generous headroom.
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
