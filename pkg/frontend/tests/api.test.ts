// API client: request shapes, error mapping, 1-second polling.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient, ApiError } from "../src/api";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

let fetchMock: ReturnType<typeof vi.fn>;

beforeEach(() => {
  fetchMock = vi.fn();
  vi.stubGlobal("fetch", fetchMock);
});

afterEach(() => {
  vi.unstubAllGlobals();
  vi.useRealTimers();
});

describe("requests", () => {
  it("uploads documents", async () => {
    fetchMock.mockResolvedValue(jsonResponse({ id: "abc" }));
    const api = new ApiClient("http://svc");
    const result = await api.uploadDocument("body text", "Title");
    expect(result.id).toBe("abc");
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("http://svc/documents");
    expect(JSON.parse((init as RequestInit).body as string)).toEqual({
      body: "body text",
      title: "Title",
    });
  });

  it("starts runs with a statement span", async () => {
    fetchMock.mockResolvedValue(jsonResponse({ run_id: "r1" }));
    const api = new ApiClient();
    await api.startRun("doc1", { span: { offset: 5, length: 12 } }, { granularity: "both" });
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("/documents/doc1/runs");
    expect(JSON.parse((init as RequestInit).body as string)).toEqual({
      options: { granularity: "both" },
      statement_span: { offset: 5, length: 12 },
    });
  });

  it("maps error details onto ApiError", async () => {
    fetchMock.mockResolvedValue(jsonResponse({ detail: "span outside document bounds" }, 422));
    const api = new ApiClient();
    await expect(api.startRun("d", { text: "x" }, { granularity: "fine" }))
      .rejects.toMatchObject({ status: 422, message: "span outside document bounds" });
    await expect(api.getRun("nope").catch((e) => e)).resolves.toBeInstanceOf(ApiError);
  });
});

describe("pollRun", () => {
  it("polls at one-second intervals until done", async () => {
    vi.useFakeTimers();
    const records = [
      { id: "r1", status: "pending" },
      { id: "r1", status: "running" },
      { id: "r1", status: "done", outputs: { tables: [], specs: [], charts: [], trace: "t" } },
    ];
    let call = 0;
    fetchMock.mockImplementation(() =>
      Promise.resolve(jsonResponse(records[Math.min(call++, records.length - 1)])),
    );
    const api = new ApiClient();
    const seen: string[] = [];
    const promise = api.pollRun("r1", 1000, (r) => seen.push(r.status));

    await vi.advanceTimersByTimeAsync(0); // immediate first probe
    expect(seen).toEqual(["pending"]);
    await vi.advanceTimersByTimeAsync(999);
    expect(seen).toEqual(["pending"]);
    await vi.advanceTimersByTimeAsync(1);
    expect(seen).toEqual(["pending", "running"]);
    await vi.advanceTimersByTimeAsync(1000);
    const record = await promise;
    expect(record.status).toBe("done");
    expect(seen).toEqual(["pending", "running", "done"]);
  });

  it("stops polling after failure", async () => {
    vi.useFakeTimers();
    fetchMock.mockResolvedValue(jsonResponse({
      id: "r2", status: "failed",
      error: { stage: "populate", message: "ungrounded" },
    }));
    const api = new ApiClient();
    const promise = api.pollRun("r2", 1000);
    await vi.advanceTimersByTimeAsync(0);
    const record = await promise;
    expect(record.status).toBe("failed");
    const calls = fetchMock.mock.calls.length;
    await vi.advanceTimersByTimeAsync(5000);
    expect(fetchMock.mock.calls.length).toBe(calls);
  });
});
