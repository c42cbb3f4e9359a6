import { describe, expect, it } from "vitest";

import { ApiError, postWhatif } from "../src/api.js";

describe("postWhatif", () => {
  it("posts to the versioned route with only the provided fields", async () => {
    let seen: { url: string; body: string } | null = null;
    const fetchImpl = async (url: string, init: RequestInit): Promise<Response> => {
      seen = { url, body: init.body as string };
      return new Response("{}", { status: 200 });
    };
    await postWhatif("http://h:8000", { budget: 75 }, fetchImpl);
    expect(seen!.url).toBe("http://h:8000/v1/whatif");
    expect(JSON.parse(seen!.body)).toEqual({ budget: 75 });
  });

  it("carries optional knobs through untouched", async () => {
    let body = "";
    const fetchImpl = async (_: string, init: RequestInit): Promise<Response> => {
      body = init.body as string;
      return new Response("{}", { status: 200 });
    };
    await postWhatif(
      "",
      { budget: 10, floors: { rural: 1 }, target_gap: 0.05, solver: "greedy" },
      fetchImpl,
    );
    expect(JSON.parse(body)).toEqual({
      budget: 10,
      floors: { rural: 1 },
      target_gap: 0.05,
      solver: "greedy",
    });
  });

  it("raises ApiError with the service detail and group", async () => {
    const fetchImpl = async (): Promise<Response> =>
      new Response(JSON.stringify({ detail: "budget must be a number", group: undefined }), {
        status: 400,
      });
    const err = await postWhatif("", { budget: NaN }, fetchImpl).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.message).toBe("budget must be a number");
  });

  it("falls back to the status line for non-JSON errors", async () => {
    const fetchImpl = async (): Promise<Response> =>
      new Response("gateway timeout", { status: 504 });
    const err = await postWhatif("", { budget: 1 }, fetchImpl).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.message).toBe("HTTP 504");
  });
});
