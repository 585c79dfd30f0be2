/**
 * Error taxonomy for the board console.
 *
 * Validation/transition/authorization mirror the server's rejection
 * classes so client-side prechecks fail the same way the server would.
 * Divergence and gap errors are replica-specific: they mean the local
 * copy can no longer trust itself and must re-checkout.
 */

export class ValidationError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ValidationError";
  }
}

export class TransitionError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "TransitionError";
  }
}

export class AuthorizationError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "AuthorizationError";
  }
}

/** Query text failed to parse; `pos` is the character offset. */
export class QueryError extends Error {
  readonly pos: number;

  constructor(message: string, pos: number) {
    super(`${message} (at ${pos})`);
    this.name = "QueryError";
    this.pos = pos;
  }
}

/** The replica's digest stopped matching the server's. Fatal: re-checkout. */
export class DivergenceError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "DivergenceError";
  }
}

/** A delta arrived out of order. Fatal for the replica: re-checkout. */
export class GapError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "GapError";
  }
}

/** Non-2xx HTTP response from the board server. */
export class HttpError extends Error {
  readonly status: number;
  readonly body: string;

  constructor(status: number, body: string) {
    super(`HTTP ${status}: ${body}`);
    this.name = "HttpError";
    this.status = status;
    this.body = body;
  }
}
