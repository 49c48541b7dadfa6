// Pure console state: a reducer over wire events plus local user actions.
// The console performs no planning or dialog logic of its own; everything
// rendered is derived from events the service emitted (or the user typed).

import type {
  MarkerPosition,
  PlanOption,
  SceneMessage,
  TranscriptEntry,
  WireEvent,
} from "./types.js";

export interface ConsoleState {
  sessionId: string | null;
  phase: string; // specifying | confirmed | failed | done
  transcript: TranscriptEntry[];
  planOptions: PlanOption[];
  sceneMessages: SceneMessage[];
  marker: MarkerPosition | null;
  lastSeq: number; // high-water mark over applied wire events
  busy: boolean; // a request is in flight; input disabled
  connected: boolean;
  liveMessage: string; // latest spoken line, for the aria-live region
}

export function initialState(): ConsoleState {
  return {
    sessionId: null,
    phase: "specifying",
    transcript: [],
    planOptions: [],
    sceneMessages: [],
    marker: null,
    lastSeq: 0,
    busy: false,
    connected: false,
    liveMessage: "",
  };
}

/** Apply one wire event.  Events at or below the high-water mark are replay
 * duplicates (e.g. after a reconnect) and leave the state untouched. */
export function applyEvent(state: ConsoleState, event: WireEvent): ConsoleState {
  if (event.seq <= state.lastSeq) {
    return state;
  }
  const next: ConsoleState = { ...state, lastSeq: event.seq };
  switch (event.kind) {
    case "robot_utterance": {
      const text = String(event.payload.text ?? "");
      next.transcript = [
        ...state.transcript,
        { order: event.seq, speaker: "robot", text },
      ];
      next.liveMessage = text;
      break;
    }
    case "plan_options": {
      next.planOptions = (event.payload.options as PlanOption[]) ?? [];
      break;
    }
    case "scene_event": {
      const message: SceneMessage = {
        seq: event.seq,
        t: Number(event.payload.t ?? 0),
        kind: String(event.payload.kind ?? ""),
        message: String(event.payload.message ?? ""),
      };
      next.sceneMessages = [...state.sceneMessages, message];
      next.liveMessage = message.message;
      break;
    }
    case "pose_update": {
      next.marker = {
        x: Number(event.payload.x),
        y: Number(event.payload.y),
        t: Number(event.payload.t),
      };
      break;
    }
    case "session_phase": {
      next.phase = String(event.payload.phase ?? state.phase);
      break;
    }
    default:
      break; // unknown kinds advance the high-water mark only
  }
  return next;
}

export function applyEvents(state: ConsoleState, events: WireEvent[]): ConsoleState {
  return events.reduce(applyEvent, state);
}

/** Locally echo what the handler typed; ordering slots after the last wire
 * event so the bubble appears where it was sent. */
export function addHandlerUtterance(state: ConsoleState, text: string): ConsoleState {
  return {
    ...state,
    transcript: [
      ...state.transcript,
      { order: state.lastSeq + 0.5, speaker: "handler", text },
    ],
  };
}

export function setBusy(state: ConsoleState, busy: boolean): ConsoleState {
  return { ...state, busy };
}

export function setConnected(state: ConsoleState, connected: boolean): ConsoleState {
  return { ...state, connected };
}

export function setSession(state: ConsoleState, sessionId: string): ConsoleState {
  return { ...state, sessionId };
}

export function isFinished(state: ConsoleState): boolean {
  return state.phase === "done" || state.phase === "failed";
}
