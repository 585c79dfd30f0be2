/**
 * Wire records and the HTTP client for the board server.
 *
 * The server exposes five routes:
 *
 *   GET  /health            liveness, no auth
 *   GET  /snapshot          current state image for checkout
 *   GET  /deltas?from=N     close-delimited NDJSON stream of deltas, live
 *   POST /command           submit one command record
 *   POST /commands          submit an NDJSON batch, one result entry each
 *
 * Authenticated routes take `Authorization: Bearer <token>`; the token
 * decides the issuer role (manager or member) and the server stamps it
 * into the sequenced command. Submissions are idempotent on
 * (client_id, command_id): a retry returns the original delta flagged
 * as a duplicate.
 */

import type { TopologyDoc } from "./topology.js";
import { HttpError } from "./errors.js";

export interface IssuerRec {
  client_id: string;
  role?: "manager" | "member";
}

export interface CommandRecord {
  command_id: string;
  issuer: IssuerRec;
  kind: string;
  payload: Record<string, unknown>;
  at: number;
}

export interface OutcomeRec {
  accepted: boolean;
  reason_code?: string;
  reason?: string;
}

export interface DeltaRecord {
  seq: number;
  command: CommandRecord;
  outcome: OutcomeRec;
  digest: string;
}

export interface SnapshotRecord {
  seq: number;
  digest: string;
  topology: TopologyDoc;
  state: Record<string, unknown>;
}

export interface SubmitResponse {
  delta: DeltaRecord;
  duplicate: boolean;
}

export type BatchEntry = { delta: DeltaRecord; duplicate: boolean } | { error: string };

export interface HealthResponse {
  status: string;
  seq: number;
}

let commandCounter = 0;

/** Build a command record with a fresh idempotency id and current time. */
export function makeCommand(
  clientId: string,
  kind: string,
  payload: Record<string, unknown>,
  options: { commandId?: string; at?: number } = {},
): CommandRecord {
  commandCounter += 1;
  return {
    command_id: options.commandId ?? `${clientId}-${Date.now()}-${commandCounter}`,
    issuer: { client_id: clientId },
    kind,
    payload,
    at: options.at ?? Date.now(),
  };
}

export class BoardClient {
  readonly baseUrl: string;
  private readonly token: string;

  constructor(baseUrl: string, token: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.token = token;
  }

  private headers(): Record<string, string> {
    return { Authorization: `Bearer ${this.token}` };
  }

  private async checkJson<T>(response: Response): Promise<T> {
    const text = await response.text();
    if (!response.ok) {
      throw new HttpError(response.status, text);
    }
    return JSON.parse(text) as T;
  }

  async health(): Promise<HealthResponse> {
    const response = await fetch(`${this.baseUrl}/health`);
    return this.checkJson<HealthResponse>(response);
  }

  async snapshot(): Promise<SnapshotRecord> {
    const response = await fetch(`${this.baseUrl}/snapshot`, { headers: this.headers() });
    return this.checkJson<SnapshotRecord>(response);
  }

  async submit(record: CommandRecord): Promise<SubmitResponse> {
    const response = await fetch(`${this.baseUrl}/command`, {
      method: "POST",
      headers: { ...this.headers(), "Content-Type": "application/json" },
      body: JSON.stringify(record),
    });
    return this.checkJson<SubmitResponse>(response);
  }

  async submitBatch(records: CommandRecord[]): Promise<BatchEntry[]> {
    const body = records.map((r) => JSON.stringify(r)).join("\n") + "\n";
    const response = await fetch(`${this.baseUrl}/commands`, {
      method: "POST",
      headers: { ...this.headers(), "Content-Type": "application/x-ndjson" },
      body,
    });
    const parsed = await this.checkJson<{ results: BatchEntry[] }>(response);
    return parsed.results;
  }

  /**
   * Stream deltas from `fromSeq` onward, yielding them in order until
   * the signal aborts or the server closes the stream. One manager
   * token may hold at most one stream; a second gets HTTP 409.
   */
  async *streamDeltas(fromSeq = 1, signal?: AbortSignal): AsyncGenerator<DeltaRecord> {
    const response = await fetch(`${this.baseUrl}/deltas?from=${fromSeq}`, {
      headers: this.headers(),
      signal,
    });
    if (!response.ok) {
      throw new HttpError(response.status, await response.text());
    }
    const reader = response.body!.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        let newline = buffer.indexOf("\n");
        while (newline !== -1) {
          const line = buffer.slice(0, newline).trim();
          buffer = buffer.slice(newline + 1);
          if (line.length > 0) {
            yield JSON.parse(line) as DeltaRecord;
          }
          newline = buffer.indexOf("\n");
        }
      }
    } finally {
      reader.releaseLock();
      // Abort the body if the consumer stopped early.
      try {
        await response.body!.cancel();
      } catch {
        // Already closed.
      }
    }
  }
}
