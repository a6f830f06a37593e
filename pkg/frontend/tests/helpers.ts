import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { FetchLike } from "../src/api";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

export function fixtureRaw(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf-8");
}

/** fetch stub replaying recorded responses; routes map "METHOD path" to a
 * fixture file (or a literal payload). Records the calls it served. */
export function recordedFetch(
  routes: Record<string, string | object>
): { fetch: FetchLike; calls: string[] } {
  const calls: string[] = [];
  const impl: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "").split("?")[0];
    const key = `${method} ${path}`;
    calls.push(key);
    const hit = routes[key];
    if (hit === undefined) {
      return new Response(JSON.stringify({ detail: `no recording for ${key}` }), { status: 404 });
    }
    const body = typeof hit === "string" ? fixtureRaw(hit) : JSON.stringify(hit);
    return new Response(body, {
      status: 200,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fetch: impl, calls };
}
