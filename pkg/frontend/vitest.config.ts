import { defineConfig } from "vitest/config";

// The e2e files boot the Python service, so timeouts are generous.
// DOM tests opt into jsdom per-file with @vitest-environment pragmas.
export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    testTimeout: 30_000,
    hookTimeout: 45_000,
  },
});
