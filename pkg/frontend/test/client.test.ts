// Contract tests: the controller against a mock service that emits a
// session recorded from the real backend.  The console must be a pure
// renderer/controller -- identical event streams produce identical state,
// and a reconnect mid-stream converges on the uninterrupted result.

import { describe, expect, it } from "vitest";

import { SessionController, StreamHandle, Transport } from "../src/client";
import type {
  CreateSessionResponse,
  MapGeometry,
  WireEvent,
} from "../src/types";

import recording from "./fixtures/recorded_session.json";

const RECORDED_EVENTS = recording.events as WireEvent[];

function tick(ms = 0): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

interface MockOptions {
  dropAfter?: number; // close the first connection after N events
}

class MockService implements Transport {
  calls: string[] = [];
  connections = 0;

  constructor(
    private events: WireEvent[],
    private options: MockOptions = {},
  ) {}

  async createSession(body: {
    map_id: string;
    plan_info_enabled: boolean;
  }): Promise<CreateSessionResponse> {
    this.calls.push(`create:${body.map_id}`);
    return recording.create_response as CreateSessionResponse;
  }

  async postUtterance(sessionId: string, text: string): Promise<unknown> {
    this.calls.push(`utterance:${text}`);
    return { phase: "specifying", robot_text: "", last_seq: 0 };
  }

  async choosePlan(sessionId: string, destination: string): Promise<unknown> {
    this.calls.push(`choose:${destination}`);
    return { phase: "confirmed", robot_text: "", last_seq: 0 };
  }

  async fetchMap(): Promise<MapGeometry> {
    return recording.map_geometry as unknown as MapGeometry;
  }

  openStream(
    sessionId: string,
    onEvent: (event: WireEvent) => void,
    onClose: () => void,
  ): StreamHandle {
    this.connections += 1;
    const isFirst = this.connections === 1;
    const limit =
      isFirst && this.options.dropAfter !== undefined
        ? this.options.dropAfter
        : this.events.length;
    let closed = false;
    // the real service replays from seq 1 on every connect
    void (async () => {
      for (let i = 0; i < limit && !closed; i += 1) {
        onEvent(this.events[i]);
        if (i % 40 === 0) {
          await tick();
        }
      }
      onClose();
    })();
    return {
      close: () => {
        closed = true;
      },
    };
  }
}

async function settle(controller: SessionController): Promise<void> {
  for (let i = 0; i < 60; i += 1) {
    await tick(2);
    if (controller.state.phase === "done") {
      return;
    }
  }
  throw new Error(`session never reached done: ${controller.state.phase}`);
}

describe("SessionController against the recorded session", () => {
  it("replays the recording into a finished console state", async () => {
    const service = new MockService(RECORDED_EVENTS);
    const controller = new SessionController(service, { reconnectDelayMs: 0 });
    await controller.start();
    await settle(controller);
    expect(controller.state.lastSeq).toBe(
      RECORDED_EVENTS[RECORDED_EVENTS.length - 1].seq,
    );
    expect(controller.state.transcript.length).toBeGreaterThan(0);
    expect(controller.geometry?.locations.length).toBe(8);
  });

  it("reconnect mid-stream converges on the uninterrupted state", async () => {
    const smooth = new MockService(RECORDED_EVENTS);
    const uninterrupted = new SessionController(smooth, { reconnectDelayMs: 0 });
    await uninterrupted.start();
    await settle(uninterrupted);

    const flaky = new MockService(RECORDED_EVENTS, { dropAfter: 25 });
    const interrupted = new SessionController(flaky, { reconnectDelayMs: 0 });
    await interrupted.start();
    await settle(interrupted);

    expect(flaky.connections).toBeGreaterThanOrEqual(2);
    // ignore the transient connection flag; everything else must match
    const a = { ...uninterrupted.state, connected: true };
    const b = { ...interrupted.state, connected: true };
    expect(b).toEqual(a);
  });

  it("does not reconnect once the session is done", async () => {
    const service = new MockService(RECORDED_EVENTS);
    const controller = new SessionController(service, { reconnectDelayMs: 0 });
    await controller.start();
    await settle(controller);
    const connections = service.connections;
    await tick(10);
    expect(service.connections).toBe(connections);
  });

  it("passes user actions through verbatim (no dialog logic in the console)", async () => {
    const service = new MockService([]);
    const controller = new SessionController(service, { reconnectDelayMs: 0 });
    await controller.start();
    await controller.sendUtterance("I'm thirsty");
    await controller.choosePlan("water fountain");
    controller.close();
    expect(service.calls).toEqual([
      "create:office",
      "utterance:I'm thirsty",
      "choose:water fountain",
    ]);
    const handlerBubbles = controller.state.transcript.filter(
      (e) => e.speaker === "handler",
    );
    expect(handlerBubbles.map((e) => e.text)).toEqual(["I'm thirsty"]);
  });

  it("disables input while a request is in flight", async () => {
    const service = new MockService([]);
    let resolveUtterance: (() => void) | null = null;
    service.postUtterance = (sessionId: string, text: string) =>
      new Promise((resolve) => {
        resolveUtterance = () => resolve({});
      });
    const busyStates: boolean[] = [];
    const controller = new SessionController(service, {
      reconnectDelayMs: 0,
      onChange: (state) => busyStates.push(state.busy),
    });
    await controller.start();
    const pending = controller.sendUtterance("hello");
    await tick();
    expect(controller.state.busy).toBe(true);
    resolveUtterance!();
    await pending;
    expect(controller.state.busy).toBe(false);
    expect(busyStates).toContain(true);
    controller.close();
  });

  it("surfaces transport errors without corrupting state", async () => {
    const service = new MockService([]);
    service.choosePlan = async () => {
      throw new Error("409: wrong phase");
    };
    const errors: string[] = [];
    const controller = new SessionController(service, {
      reconnectDelayMs: 0,
      onError: (message) => errors.push(message),
    });
    await controller.start();
    const before = { ...controller.state, busy: false };
    await controller.choosePlan("kitchen");
    expect(errors.length).toBe(1);
    expect({ ...controller.state, busy: false }).toEqual(before);
    controller.close();
  });
});
