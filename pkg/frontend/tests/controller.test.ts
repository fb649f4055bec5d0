import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { App, ViewSink } from "../src/controller.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function captureSink() {
  const regions: Record<string, string> = {};
  const sink: ViewSink = {
    classes: (html) => (regions.classes = html),
    gallery: (html) => (regions.gallery = html),
    query: (html) => (regions.query = html),
    results: (html) => (regions.results = html),
    evalTable: (html) => (regions.evalTable = html),
  };
  return { regions, sink };
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("App controller", () => {
  it("start loads classes and the all-classes gallery", async () => {
    vi.spyOn(globalThis, "fetch").mockImplementation((input) => {
      const url = String(input);
      if (url.endsWith("/api/classes")) {
        return Promise.resolve(jsonResponse([{ name: "a", count: 2 }]));
      }
      return Promise.resolve(
        jsonResponse([
          { id: 0, label: "a" },
          { id: 1, label: "a" },
        ]),
      );
    });
    const { regions, sink } = captureSink();
    const app = new App(new ApiClient(), sink);
    await app.start();
    expect(regions.classes).toContain("All (2)");
    expect(regions.gallery).toContain('data-query-id="1"');
  });

  it("query results render cards that re-query on click", async () => {
    const queried: number[] = [];
    vi.spyOn(globalThis, "fetch").mockImplementation((input, init) => {
      const url = String(input);
      if (url.endsWith("/api/query")) {
        const body = JSON.parse(init!.body as string);
        queried.push(body.id);
        return Promise.resolve(
          jsonResponse({
            k: body.k,
            entries: [
              {
                id: body.id,
                label: "a",
                path: "x.png",
                distance: 0,
                segments: { histogram: 0, moments: 0, hu: 0 },
              },
              {
                id: 99,
                label: "b",
                path: "y.png",
                distance: 1.5,
                segments: { histogram: 1, moments: 0.3, hu: 0.2 },
              },
            ],
          }),
        );
      }
      return Promise.resolve(jsonResponse([]));
    });
    const { regions, sink } = captureSink();
    const app = new App(new ApiClient(), sink);
    await app.queryById(7);
    expect(regions.results).toContain('data-query-id="99"');
    expect(app.state.lastResult?.entries).toHaveLength(2);

    // The iterate loop: a result card click issues the follow-up query.
    const match = regions.results.match(/data-query-id="(\d+)"/g)!;
    expect(match.length).toBe(2);
    await app.queryById(99);
    expect(queried).toEqual([7, 99]);
    expect(regions.query).toContain("image #99");
  });

  it("service failure shows a banner instead of crashing", async () => {
    vi.spyOn(globalThis, "fetch").mockRejectedValue(new TypeError("fetch failed"));
    const { regions, sink } = captureSink();
    const app = new App(new ApiClient(), sink);
    await app.refreshClasses();
    await app.showGallery();
    expect(regions.classes).toContain("banner error");
    expect(regions.gallery).toContain("banner error");
  });

  it("upload rejection surfaces the 400 detail inline", async () => {
    vi.spyOn(globalThis, "fetch").mockResolvedValue(
      jsonResponse({ detail: "empty image payload" }, 400),
    );
    const { regions, sink } = captureSink();
    const app = new App(new ApiClient(), sink);
    await app.queryByUpload(new Blob([]), "empty.png");
    expect(regions.results).toContain("empty image payload");
  });

  it("setK clamps and re-runs an active id query", async () => {
    const ks: number[] = [];
    vi.spyOn(globalThis, "fetch").mockImplementation((input, init) => {
      const body = JSON.parse(init!.body as string);
      ks.push(body.k);
      return Promise.resolve(jsonResponse({ k: body.k, entries: [] }));
    });
    const { sink } = captureSink();
    const app = new App(new ApiClient(), sink);
    await app.queryById(3);
    await app.setK(500);
    expect(app.state.k).toBe(100);
    expect(ks).toEqual([20, 100]);
  });
});
