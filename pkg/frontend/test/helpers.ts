/** Shared fixture plumbing: replay real engine frames through the view model. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ServerEvent, Snapshot } from "../src/protocol.js";
import { ScreenContract, renderPhase } from "../src/screen.js";
import { ClientViewModel } from "../src/view_model.js";

const HERE = dirname(fileURLToPath(import.meta.url));

export interface GameFixture {
  seed: number;
  policies: string[];
  final_hash: string;
  frames: Record<string, ServerEvent[]>;
  stats: Record<string, unknown>;
}

export interface ReconnectFixture {
  frames_seat2: ServerEvent[];
  reattach_snapshot: Snapshot;
  assigned: string;
}

export function loadFixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(HERE, "fixtures", name), "utf-8")) as T;
}

export interface Step {
  event: ServerEvent;
  contract: ScreenContract;
}

/** Feed one seat's recorded frames through a fresh view model, rendering
 * after every event exactly as the live client does. */
export function replaySeat(frames: ServerEvent[], opts?: { connected?: boolean }): {
  viewModel: ClientViewModel;
  steps: Step[];
} {
  const viewModel = new ClientViewModel();
  if (opts?.connected !== false) viewModel.connectionUp();
  const steps: Step[] = [];
  for (const event of frames) {
    viewModel.observe(event);
    steps.push({ event, contract: renderPhase(viewModel) });
  }
  return { viewModel, steps };
}

/** Every strategy-name occurrence in a JSON-serialized contract. */
export function strategyMentions(contract: ScreenContract, names: readonly string[]): string[] {
  const raw = JSON.stringify(contract);
  return names.filter((name) => raw.includes(name));
}
