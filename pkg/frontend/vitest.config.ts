import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    environment: "node",
    // The round-trip suite boots the Python service (compiled-kernel import
    // on first start) and captures a 60-simulated-second session.
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
