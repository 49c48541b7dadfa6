// Wire protocol types, mirroring the session service's JSON schemas.

export interface WireEvent {
  seq: number;
  kind:
    | "robot_utterance"
    | "plan_options"
    | "scene_event"
    | "pose_update"
    | "session_phase"
    | string;
  payload: Record<string, unknown>;
}

export interface PlanOption {
  destination: string;
  total_cost: number;
  estimated_time: number;
  door_open_count: number;
}

export interface CreateSessionResponse {
  session_id: string;
  map_id: string;
  start_location: string;
  greeting: string;
}

export interface MapLocation {
  id: string;
  name: string;
  centroid: [number, number];
  region: [number, number][];
}

export interface MapDoor {
  id: string;
  position: [number, number];
}

export interface MapGeometry {
  locations: MapLocation[];
  doors: MapDoor[];
  hasdoor: [string, string][];
  open_adjacency: [string, string][];
  door_open_cost: number;
}

export interface TranscriptEntry {
  order: number; // render order; wire events use their seq
  speaker: "robot" | "handler";
  text: string;
}

export interface SceneMessage {
  seq: number;
  t: number;
  kind: string;
  message: string;
}

export interface MarkerPosition {
  x: number;
  y: number;
  t: number;
}
