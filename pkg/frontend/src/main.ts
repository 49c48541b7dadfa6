// Bootstrap: connect to the session service and wire the UI together.
// The service base URL comes from ?service=... (default: same origin).

import { HttpTransport, SessionController } from "./client.js";
import { render } from "./render.js";

function serviceBaseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? window.location.origin;
}

function showBanner(message: string): void {
  const banner = document.querySelector<HTMLElement>("#banner");
  if (banner) {
    banner.textContent = message;
    banner.hidden = !message;
  }
}

async function boot(): Promise<void> {
  const root = document.body;
  const params = new URLSearchParams(window.location.search);
  const transport = new HttpTransport(serviceBaseUrl());
  const controller = new SessionController(transport, {
    mapId: params.get("map") ?? "office",
    planInfo: params.get("plan_info") !== "0",
    startLocation: params.get("start") ?? undefined,
    onChange: (state) =>
      render(root, state, controller.geometry, {
        onSend: (text) => void controller.sendUtterance(text),
        onChoose: (destination) => void controller.choosePlan(destination),
      }),
    onError: (message) => showBanner(message),
  });

  const input = document.querySelector<HTMLInputElement>("#utterance-input");
  const send = document.querySelector<HTMLButtonElement>("#send-button");
  const submit = () => {
    const text = input?.value.trim();
    if (text) {
      if (input) input.value = "";
      void controller.sendUtterance(text);
    }
  };
  send?.addEventListener("click", submit);
  input?.addEventListener("keydown", (event) => {
    if (event.key === "Enter") submit();
  });

  try {
    await controller.start();
    showBanner("");
  } catch (error) {
    showBanner(`Could not reach the session service: ${error}. Retrying in 3s...`);
    setTimeout(() => void boot(), 3000);
  }
}

void boot();
