import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function client(response: Response) {
  const fetchImpl = vi.fn(async () => response);
  return { api: new ApiClient("", fetchImpl), fetchImpl };
}

describe("ApiClient", () => {
  it("GETs insights from /api/v1/insights", async () => {
    const payload = [
      {
        uuid: "i-1",
        kind: "demand_spike",
        date: "2019-10-01T13:00:00Z",
        severity: 0.5,
        description: "spike",
        refers_to: [],
      },
    ];
    const { api, fetchImpl } = client(jsonResponse(payload));
    await expect(api.insights()).resolves.toEqual(payload);
    expect(fetchImpl).toHaveBeenCalledWith("/api/v1/insights", undefined);
  });

  it("passes the since filter as a query parameter", async () => {
    const { api, fetchImpl } = client(jsonResponse([]));
    await api.insights("2019-10-01T00:00:00+00:00");
    expect(fetchImpl).toHaveBeenCalledWith(
      "/api/v1/insights?since=2019-10-01T00%3A00%3A00%2B00%3A00",
      undefined,
    );
  });

  it("URL-encodes the insight uuid in the options path", async () => {
    const { api, fetchImpl } = client(jsonResponse([]));
    await api.options("a/b");
    expect(fetchImpl).toHaveBeenCalledWith(
      "/api/v1/insights/a%2Fb/options",
      undefined,
    );
  });

  it("POSTs feedback as JSON", async () => {
    const { api, fetchImpl } = client(
      jsonResponse({ feedback_uuid: "f-1", option_uuid: "o-1", verdict: "accepted" }),
    );
    const result = await api.sendFeedback({
      insight_uuid: "i-1",
      verdict: "accepted",
      user: "ada",
      option_uuid: "o-1",
    });
    expect(result.feedback_uuid).toBe("f-1");
    const [url, init] = fetchImpl.mock.calls[0] as [string, RequestInit];
    expect(url).toBe("/api/v1/feedback");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body as string)).toEqual({
      insight_uuid: "i-1",
      verdict: "accepted",
      user: "ada",
      option_uuid: "o-1",
    });
  });

  it("prefixes requests with the configured base URL", async () => {
    const fetchImpl = vi.fn(async () => jsonResponse({ scopes: [], csv: "" }));
    const api = new ApiClient("http://twin:8000", fetchImpl);
    await api.metrics(0.5);
    expect(fetchImpl).toHaveBeenCalledWith(
      "http://twin:8000/api/v1/metrics?sample_fraction=0.5",
      undefined,
    );
  });

  it("surfaces the engine error code from a structured error body", async () => {
    const { api } = client(
      jsonResponse(
        { detail: { code: "graph.not_found", message: "no insight i-9" } },
        404,
      ),
    );
    const error = await api.options("i-9").catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(404);
    expect((error as ApiError).code).toBe("graph.not_found");
    expect((error as ApiError).message).toBe("no insight i-9");
  });

  it("falls back to a generic code for non-JSON error bodies", async () => {
    const { api } = client(new Response("gateway exploded", { status: 502 }));
    const error = await api.health().catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).code).toBe("http.error");
    expect((error as ApiError).message).toBe("HTTP 502");
  });
});
