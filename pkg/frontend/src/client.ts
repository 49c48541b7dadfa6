// Service transport and the session controller.
//
// The transport is injectable so contract tests can drive the controller
// from a mock service that replays a recorded session; the real one speaks
// HTTP + WebSocket to the session service.

import {
  ConsoleState,
  addHandlerUtterance,
  applyEvent,
  initialState,
  isFinished,
  setBusy,
  setConnected,
  setSession,
} from "./state.js";
import type { CreateSessionResponse, MapGeometry, WireEvent } from "./types.js";

export interface StreamHandle {
  close(): void;
}

export interface Transport {
  createSession(body: {
    map_id: string;
    plan_info_enabled: boolean;
    start_location?: string;
  }): Promise<CreateSessionResponse>;
  postUtterance(sessionId: string, text: string): Promise<unknown>;
  choosePlan(sessionId: string, destination: string): Promise<unknown>;
  fetchMap(mapId: string): Promise<MapGeometry>;
  /** Open the event stream; the service replays from seq 1 on every connect. */
  openStream(
    sessionId: string,
    onEvent: (event: WireEvent) => void,
    onClose: () => void,
  ): StreamHandle;
}

interface WebSocketLike {
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((error: unknown) => void) | null;
  close(): void;
}

export class HttpTransport implements Transport {
  constructor(
    private baseUrl: string,
    private fetchImpl: typeof fetch = fetch.bind(globalThis),
    private wsFactory: (url: string) => WebSocketLike = (url) =>
      new WebSocket(url) as unknown as WebSocketLike,
  ) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      const detail = await response.text();
      throw new Error(`${response.status}: ${detail}`);
    }
    return response.json();
  }

  createSession(body: {
    map_id: string;
    plan_info_enabled: boolean;
    start_location?: string;
  }): Promise<CreateSessionResponse> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify(body),
    }) as Promise<CreateSessionResponse>;
  }

  postUtterance(sessionId: string, text: string): Promise<unknown> {
    return this.request(`/sessions/${sessionId}/utterance`, {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  choosePlan(sessionId: string, destination: string): Promise<unknown> {
    return this.request(`/sessions/${sessionId}/choose`, {
      method: "POST",
      body: JSON.stringify({ destination }),
    });
  }

  fetchMap(mapId: string): Promise<MapGeometry> {
    return this.request(`/maps/${mapId}`) as Promise<MapGeometry>;
  }

  openStream(
    sessionId: string,
    onEvent: (event: WireEvent) => void,
    onClose: () => void,
  ): StreamHandle {
    const wsUrl =
      this.baseUrl.replace(/^http/, "ws") + `/sessions/${sessionId}/stream`;
    const socket = this.wsFactory(wsUrl);
    socket.onmessage = (message) => onEvent(JSON.parse(message.data) as WireEvent);
    socket.onclose = onClose;
    socket.onerror = () => onClose();
    return { close: () => socket.close() };
  }
}

export interface ControllerOptions {
  mapId?: string;
  planInfo?: boolean;
  startLocation?: string;
  reconnectDelayMs?: number;
  onChange?: (state: ConsoleState) => void;
  onError?: (message: string) => void;
}

/** Drives the console: one session, one event stream, automatic reconnect
 * with replay.  All state transitions go through the pure reducer. */
export class SessionController {
  state: ConsoleState = initialState();
  geometry: MapGeometry | null = null;
  private stream: StreamHandle | null = null;
  private closed = false;

  constructor(
    private transport: Transport,
    private options: ControllerOptions = {},
  ) {}

  private emit(): void {
    this.options.onChange?.(this.state);
  }

  private update(state: ConsoleState): void {
    this.state = state;
    this.emit();
  }

  async start(): Promise<void> {
    const mapId = this.options.mapId ?? "office";
    const created = await this.transport.createSession({
      map_id: mapId,
      plan_info_enabled: this.options.planInfo ?? true,
      start_location: this.options.startLocation,
    });
    this.geometry = await this.transport.fetchMap(created.map_id);
    this.update(setSession(this.state, created.session_id));
    this.connect();
  }

  private connect(): void {
    if (this.closed || !this.state.sessionId) {
      return;
    }
    this.stream = this.transport.openStream(
      this.state.sessionId,
      (event) => this.update(applyEvent(this.state, event)),
      () => this.handleStreamClosed(),
    );
    this.update(setConnected(this.state, true));
  }

  private handleStreamClosed(): void {
    this.stream = null;
    this.update(setConnected(this.state, false));
    if (this.closed || isFinished(this.state)) {
      return;
    }
    const delay = this.options.reconnectDelayMs ?? 500;
    setTimeout(() => this.connect(), delay);
  }

  async sendUtterance(text: string): Promise<void> {
    if (!this.state.sessionId || this.state.busy) {
      return;
    }
    this.update(setBusy(addHandlerUtterance(this.state, text), true));
    try {
      await this.transport.postUtterance(this.state.sessionId, text);
    } catch (error) {
      this.options.onError?.(String(error));
    } finally {
      this.update(setBusy(this.state, false));
    }
  }

  async choosePlan(destination: string): Promise<void> {
    if (!this.state.sessionId || this.state.busy) {
      return;
    }
    this.update(setBusy(this.state, true));
    try {
      await this.transport.choosePlan(this.state.sessionId, destination);
    } catch (error) {
      this.options.onError?.(String(error));
    } finally {
      this.update(setBusy(this.state, false));
    }
  }

  close(): void {
    this.closed = true;
    this.stream?.close();
  }
}
