// DOM rendering: transcript bubbles, plan option cards, the 2D map view,
// phase badge, and an aria-live region mirroring every spoken message.

import type { ConsoleState } from "./state.js";
import type { MapGeometry, PlanOption } from "./types.js";

export interface RenderHandlers {
  onSend(text: string): void;
  onChoose(destination: string): void;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function describeOption(option: PlanOption): string {
  const doors =
    option.door_open_count === 0
      ? "no doors"
      : option.door_open_count === 1
        ? "opening 1 door"
        : `opening ${option.door_open_count} doors`;
  return `about ${Math.round(option.estimated_time)}s, ${doors}, ${option.total_cost.toFixed(1)} m`;
}

export function renderMap(
  svg: SVGSVGElement,
  geometry: MapGeometry,
  state: ConsoleState,
): void {
  svg.innerHTML = "";
  const xs = geometry.locations.flatMap((l) => l.region.map((v) => v[0]));
  const ys = geometry.locations.flatMap((l) => l.region.map((v) => v[1]));
  const pad = 2;
  const minX = Math.min(...xs) - pad;
  const minY = Math.min(...ys) - pad;
  const width = Math.max(...xs) + pad - minX;
  const height = Math.max(...ys) + pad - minY;
  svg.setAttribute("viewBox", `${minX} ${minY} ${width} ${height}`);

  for (const location of geometry.locations) {
    const polygon = document.createElementNS(SVG_NS, "polygon");
    polygon.setAttribute(
      "points",
      location.region.map(([x, y]) => `${x},${y}`).join(" "),
    );
    polygon.setAttribute("class", "region");
    svg.appendChild(polygon);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(location.centroid[0]));
    label.setAttribute("y", String(location.centroid[1]));
    label.setAttribute("class", "region-label");
    label.textContent = location.name;
    svg.appendChild(label);
  }
  for (const door of geometry.doors) {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(door.position[0]));
    dot.setAttribute("cy", String(door.position[1]));
    dot.setAttribute("r", "0.5");
    dot.setAttribute("class", "door");
    svg.appendChild(dot);
  }
  if (state.marker) {
    const marker = document.createElementNS(SVG_NS, "circle");
    marker.setAttribute("cx", String(state.marker.x));
    marker.setAttribute("cy", String(state.marker.y));
    marker.setAttribute("r", "0.8");
    marker.setAttribute("class", "robot-marker");
    svg.appendChild(marker);
  }
}

export function render(
  root: HTMLElement,
  state: ConsoleState,
  geometry: MapGeometry | null,
  handlers: RenderHandlers,
): void {
  const badge = root.querySelector<HTMLElement>("#phase-badge");
  if (badge) {
    badge.textContent = state.connected ? state.phase : `${state.phase} (reconnecting)`;
    badge.dataset.phase = state.phase;
  }

  const transcript = root.querySelector<HTMLElement>("#transcript");
  if (transcript) {
    transcript.innerHTML = "";
    for (const entry of state.transcript) {
      const bubble = el("div", `bubble ${entry.speaker}`, entry.text);
      bubble.dataset.order = String(entry.order);
      transcript.appendChild(bubble);
    }
    transcript.scrollTop = transcript.scrollHeight;
  }

  const cards = root.querySelector<HTMLElement>("#plan-options");
  if (cards) {
    cards.innerHTML = "";
    for (const option of state.planOptions) {
      const card = el("div", "plan-card");
      card.appendChild(el("div", "plan-name", option.destination));
      card.appendChild(el("div", "plan-facts", describeOption(option)));
      const button = el("button", "choose", `Go to ${option.destination}`);
      button.disabled = state.busy || state.phase !== "specifying";
      button.addEventListener("click", () => handlers.onChoose(option.destination));
      card.appendChild(button);
      cards.appendChild(card);
    }
  }

  const scene = root.querySelector<HTMLElement>("#scene-log");
  if (scene) {
    scene.innerHTML = "";
    for (const message of state.sceneMessages) {
      scene.appendChild(el("div", "scene-line", message.message));
    }
    scene.scrollTop = scene.scrollHeight;
  }

  const live = root.querySelector<HTMLElement>("#live-region");
  if (live && live.textContent !== state.liveMessage) {
    live.textContent = state.liveMessage;
  }

  const input = root.querySelector<HTMLInputElement>("#utterance-input");
  const send = root.querySelector<HTMLButtonElement>("#send-button");
  const disabled = state.busy || state.phase !== "specifying";
  if (input) input.disabled = disabled;
  if (send) send.disabled = disabled;

  const svg = root.querySelector<SVGSVGElement>("#map-view");
  if (svg && geometry) {
    renderMap(svg, geometry, state);
  }
}
