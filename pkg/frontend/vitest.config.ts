import { defineConfig } from "vitest/config";

export default defineConfig({
  resolve: {
    // src modules import with explicit .js so the tsc output runs as browser ESM
    alias: [{ find: /^(\.{1,2}\/.*)\.js$/, replacement: "$1" }],
  },
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
  },
});
