import { describe, expect, it } from "vitest";

import { ApiError, NetworkError, PlannerApi } from "../src/api";

interface Recorded {
  url: string;
  method: string;
  body: unknown;
}

/** fetch stub that records the request and replays a canned response */
function stubFetch(
  status: number,
  payload: unknown,
  log: Recorded[],
): typeof fetch {
  return async (input, init) => {
    const rawBody = init?.body;
    log.push({
      url: String(input),
      method: init?.method ?? "GET",
      body: typeof rawBody === "string" ? JSON.parse(rawBody) : null,
    });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
}

const BASE = "http://planner.test";

describe("PlannerApi request shapes", () => {
  it("creates sessions with POST /sessions carrying weights and top_k", async () => {
    const log: Recorded[] = [];
    const api = new PlannerApi(BASE, stubFetch(201, { id: "s1" }, log));
    await api.createSession([1, 1, 1, -0.5], 7);
    expect(log).toEqual([
      {
        url: `${BASE}/sessions`,
        method: "POST",
        body: { weights: [1, 1, 1, -0.5], top_k: 7 },
      },
    ]);
  });

  it("omits unset creation options entirely", async () => {
    const log: Recorded[] = [];
    const api = new PlannerApi(BASE, stubFetch(201, { id: "s1" }, log));
    await api.createSession();
    expect(log[0]!.body).toEqual({});
  });

  it("fetches layers with the layer query parameter", async () => {
    const log: Recorded[] = [];
    const api = new PlannerApi(BASE, stubFetch(200, { layer: "demand" }, log));
    await api.fetchLayer("s1", "demand");
    expect(log[0]!.url).toBe(`${BASE}/sessions/s1/scores?layer=demand`);
    expect(log[0]!.method).toBe("GET");
  });

  it("selects cells with POST /sessions/{id}/select", async () => {
    const log: Recorded[] = [];
    const api = new PlannerApi(BASE, stubFetch(200, { id: "s1" }, log));
    await api.select("s1", [2, 3]);
    expect(log[0]!.url).toBe(`${BASE}/sessions/s1/select`);
    expect(log[0]!.method).toBe("POST");
    expect(log[0]!.body).toEqual({ cell: [2, 3] });
  });

  it("replaces weights with PUT /sessions/{id}/weights", async () => {
    const log: Recorded[] = [];
    const api = new PlannerApi(BASE, stubFetch(200, { id: "s1" }, log));
    await api.setWeights("s1", [0, 0, 0, 0]);
    expect(log[0]!.url).toBe(`${BASE}/sessions/s1/weights`);
    expect(log[0]!.method).toBe("PUT");
    expect(log[0]!.body).toEqual({ weights: [0, 0, 0, 0] });
  });

  it("submits optimize jobs and polls them by id", async () => {
    const log: Recorded[] = [];
    const api = new PlannerApi(BASE, stubFetch(200, { job: "j9", status: "queued" }, log));
    await api.submitOptimize({ iterations: 10, seed: 0 });
    await api.jobStatus("j9");
    expect(log[0]!.url).toBe(`${BASE}/optimize`);
    expect(log[0]!.body).toEqual({ iterations: 10, seed: 0 });
    expect(log[1]!.url).toBe(`${BASE}/optimize/j9`);
  });
});

describe("PlannerApi error handling", () => {
  it("unpacks the {code, message, detail} error envelope", async () => {
    const log: Recorded[] = [];
    const api = new PlannerApi(
      BASE,
      stubFetch(409, { code: "budget_exhausted", message: "no sites left", detail: { used: 5 } }, log),
    );
    const err = await api.select("s1", [0, 0]).catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(409);
    expect(apiErr.code).toBe("budget_exhausted");
    expect(apiErr.message).toBe("no sites left");
    expect(apiErr.detail).toEqual({ used: 5 });
  });

  it("falls back to generic fields when the error body is not the envelope", async () => {
    const notJson: typeof fetch = async () => new Response("<html>oops</html>", { status: 500 });
    const api = new PlannerApi(BASE, notJson);
    const err = (await api.health().catch((e: unknown) => e)) as ApiError;
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(500);
    expect(err.code).toBe("unknown_error");
    expect(err.message).toBe("HTTP 500");
    expect(err.detail).toBeNull();
  });

  it("wraps transport failures in NetworkError", async () => {
    const down: typeof fetch = async () => {
      throw new TypeError("fetch failed");
    };
    const api = new PlannerApi(BASE, down);
    const err = await api.health().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(NetworkError);
    expect((err as NetworkError).message).toBe("fetch failed");
  });

  it("does not classify HTTP errors as transport failures", async () => {
    const api = new PlannerApi(BASE, stubFetch(400, { code: "invalid_request", message: "bad" }, []));
    const err = await api.createSession([Number.NaN]).catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err).not.toBeInstanceOf(NetworkError);
  });
});
