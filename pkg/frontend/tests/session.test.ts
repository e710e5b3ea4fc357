import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { UiSession } from "../src/session.js";
import { MockService } from "./helpers/mockService.js";

function sessionWith(service: MockService): UiSession {
  return new UiSession(new ApiClient("http://svc", service.fetch), "demo", "2024-11-01");
}

describe("UiSession", () => {
  it("tracks the service revision on connect and after writes", async () => {
    const service = new MockService();
    service.revision = 3;
    const session = sessionWith(service);
    await session.connect();
    expect(session.lastSeenRevision).toBe(3);

    const outcome = await session.submit("set weights", (expectedRevision) =>
      session.api.putWeights(
        [{ viewpoint: "Implementer", level: "Process", metric_id: "pce", weight: "1" }],
        { expectedRevision },
      ),
    );
    expect(outcome.kind).toBe("applied");
    expect(session.lastSeenRevision).toBe(4);
    expect(session.pendingEdits).toHaveLength(0);
  });

  it("surfaces a reload-and-merge prompt on conflicts and keeps the edit", async () => {
    const service = new MockService();
    const session = sessionWith(service);
    await session.connect();
    service.revision = 9; // another session wrote meanwhile

    const outcome = await session.submit("set weights", (expectedRevision) =>
      session.api.putWeights([], { expectedRevision }),
    );
    expect(outcome.kind).toBe("conflict");
    expect(session.conflictPrompt).not.toBeNull();
    expect(session.conflictPrompt!.options).toEqual(["reload-and-merge", "discard-edit"]);
    expect(session.conflictPrompt!.currentRevision).toBe(9);
    expect(session.conflictPrompt!.staleRevision).toBe(0);
    // the edit was not silently applied or retried
    expect(session.pendingEdits).toHaveLength(1);
    expect(session.lastSeenRevision).toBe(0);
    expect(service.requestsFor("/weights")).toHaveLength(1);
  });

  it("reload-and-merge adopts the service revision and keeps the edit buffered", async () => {
    const service = new MockService();
    const session = sessionWith(service);
    await session.connect();
    service.revision = 2;
    await session.submit("edit", (expectedRevision) =>
      session.api.putWeights([], { expectedRevision }),
    );
    await session.reloadAndMerge();
    expect(session.conflictPrompt).toBeNull();
    expect(session.lastSeenRevision).toBe(2);
    expect(session.pendingEdits).toHaveLength(1);
    const retried = await session.submitEdit(session.pendingEdits[0]!);
    expect(retried.kind).toBe("applied");
    expect(session.lastSeenRevision).toBe(3);
  });

  it("discarding a conflicted edit clears the prompt and the buffer", async () => {
    const service = new MockService();
    const session = sessionWith(service);
    await session.connect();
    service.revision = 2;
    await session.submit("edit", (expectedRevision) =>
      session.api.putWeights([], { expectedRevision }),
    );
    session.discardConflictedEdit();
    expect(session.conflictPrompt).toBeNull();
    expect(session.pendingEdits).toHaveLength(0);
  });
});
