/**
 * The operator console: one authenticated session driving a local copy.
 *
 * Every user action becomes a command submitted to the server; nothing
 * renders optimistically. The copy advances only through the ordered
 * delta stream, so all consoles stay byte-consistent with the server
 * digest. Rejections surface the server's reason and change no local
 * state; an out-of-order delta forces a fresh checkout.
 */

import { GapError } from "./errors.js";
import { buildRenderModel, renderHtml, type RenderModel, type RenderOptions } from "./render.js";
import { BoardClient, makeCommand, type DeltaRecord, type SubmitResponse } from "./protocol.js";
import { BoardReplica } from "./replica.js";

export interface Rejection {
  seq: number;
  reasonCode: string;
  reason: string;
}

export class BoardConsole {
  readonly client: BoardClient;
  readonly clientId: string;
  replica: BoardReplica;
  /** Most recent sequenced rejection, for the operator-facing surface. */
  lastRejection: Rejection | null = null;

  private constructor(client: BoardClient, clientId: string, replica: BoardReplica) {
    this.client = client;
    this.clientId = clientId;
    this.replica = replica;
  }

  /** Check out the current board image and build the local copy. */
  static async checkout(client: BoardClient, clientId: string): Promise<BoardConsole> {
    const snapshot = await client.snapshot();
    return new BoardConsole(client, clientId, BoardReplica.fromSnapshot(snapshot));
  }

  /**
   * Apply one streamed delta. A sequence gap triggers one re-checkout
   * before giving up; rejected deltas only update the rejection surface.
   */
  async applyDelta(record: DeltaRecord): Promise<void> {
    try {
      this.replica.applyDelta(record);
    } catch (exc) {
      if (exc instanceof GapError) {
        const snapshot = await this.client.snapshot();
        this.replica = BoardReplica.fromSnapshot(snapshot);
        return;
      }
      throw exc;
    }
    if (!record.outcome.accepted) {
      this.lastRejection = {
        seq: record.seq,
        reasonCode: record.outcome.reason_code ?? "rejected",
        reason: record.outcome.reason ?? "rejected",
      };
    }
  }

  /** Follow the live stream from the copy's position until aborted. */
  async follow(signal?: AbortSignal, onDelta?: (record: DeltaRecord) => void): Promise<void> {
    for await (const record of this.client.streamDeltas(this.replica.seq + 1, signal)) {
      await this.applyDelta(record);
      onDelta?.(record);
    }
  }

  render(options: RenderOptions = {}): RenderModel {
    return buildRenderModel(this.replica, options);
  }

  renderHtml(options: RenderOptions = {}): string {
    return renderHtml(this.render(options));
  }

  // -- interact(): user actions become commands -------------------------------

  private async submit(kind: string, payload: Record<string, unknown>): Promise<SubmitResponse> {
    const result = await this.client.submit(makeCommand(this.clientId, kind, payload));
    if (!result.delta.outcome.accepted) {
      this.lastRejection = {
        seq: result.delta.seq,
        reasonCode: result.delta.outcome.reason_code ?? "rejected",
        reason: result.delta.outcome.reason ?? "rejected",
      };
    }
    return result;
  }

  raiseAlert(
    alertId: string,
    category: string,
    subjectKind: string,
    subjectRef: string,
    summary: string,
  ): Promise<SubmitResponse> {
    return this.submit("RaiseAlert", {
      alert_id: alertId,
      category,
      subject: { kind: subjectKind, ref: subjectRef },
      summary,
    });
  }

  taskAlert(alertId: string, ticketId: string, assignee: string): Promise<SubmitResponse> {
    return this.submit("TaskAlert", { alert_id: alertId, ticket_id: ticketId, assignee });
  }

  resolveAlert(alertId: string): Promise<SubmitResponse> {
    return this.submit("ResolveAlert", { alert_id: alertId });
  }

  addNote(alertId: string, note: string, author?: string): Promise<SubmitResponse> {
    const payload: Record<string, unknown> = { alert_id: alertId, note };
    if (author !== undefined) payload.author = author;
    return this.submit("AddTicketNote", payload);
  }

  reportFlow(
    endpointA: string,
    endpointB: string,
    availableFraction: number,
    currentFraction: number,
  ): Promise<SubmitResponse> {
    return this.submit("ReportFlow", {
      endpoint_a: endpointA,
      endpoint_b: endpointB,
      available_fraction: availableFraction,
      current_fraction: currentFraction,
    });
  }

  /** Tab click: activate when inactive, deactivate when active. */
  clickMissionTab(missionId: string): Promise<SubmitResponse> {
    const active = this.replica.boardView().active_missions.includes(missionId);
    const kind = active ? "DeactivateMission" : "ActivateMission";
    return this.submit(kind, { mission_id: missionId });
  }

  clickQueryTab(queryId: string): Promise<SubmitResponse> {
    const active = this.replica.boardView().active_queries.includes(queryId);
    const kind = active ? "DeactivateQuery" : "ActivateQuery";
    return this.submit(kind, { query_id: queryId });
  }

  saveQuery(queryId: string, label: string, expression: string, color: string): Promise<SubmitResponse> {
    return this.submit("SaveQuery", {
      query_id: queryId,
      label,
      expression,
      color,
    });
  }
}
