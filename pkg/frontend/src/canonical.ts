/**
 * The board's canonical JSON encoding, reproduced exactly.
 *
 * Digests are SHA-256 over JSON with sorted keys, compact separators,
 * and ASCII-only escaping, holding strings, integers, booleans, and
 * nulls. Both sides must produce the identical byte sequence for the
 * same value or replicas cannot verify convergence, so this module
 * mirrors the server encoder bit for bit:
 *
 *  - object keys sorted by code point,
 *  - separators "," and ":" with no whitespace,
 *  - '"' and '\\' escaped, control shorts \b \t \n \f \r,
 *  - every other code unit outside 0x20..0x7e as lowercase \uXXXX
 *    (astral characters become their two surrogate escapes),
 *  - integers only; any non-integer number is a bug, not data.
 */

import { createHash } from "node:crypto";

export type CanonicalValue =
  | string
  | number
  | boolean
  | null
  | CanonicalValue[]
  | { [key: string]: CanonicalValue };

const SHORT_ESCAPES: Record<number, string> = {
  0x08: "\\b",
  0x09: "\\t",
  0x0a: "\\n",
  0x0c: "\\f",
  0x0d: "\\r",
  0x22: '\\"',
  0x5c: "\\\\",
};

/** Escape one string to its canonical ASCII JSON form, quotes included. */
export function escapeString(value: string): string {
  let out = '"';
  for (let i = 0; i < value.length; i++) {
    const unit = value.charCodeAt(i);
    const short = SHORT_ESCAPES[unit];
    if (short !== undefined) {
      out += short;
    } else if (unit >= 0x20 && unit <= 0x7e) {
      out += value[i];
    } else {
      out += "\\u" + unit.toString(16).padStart(4, "0");
    }
  }
  return out + '"';
}

/** Key order: by code point, matching how the server sorts keys. */
export function codePointCompare(a: string, b: string): number {
  const ai = a[Symbol.iterator]();
  const bi = b[Symbol.iterator]();
  for (;;) {
    const an = ai.next();
    const bn = bi.next();
    if (an.done && bn.done) return 0;
    if (an.done) return -1;
    if (bn.done) return 1;
    const ac = an.value.codePointAt(0)!;
    const bc = bn.value.codePointAt(0)!;
    if (ac !== bc) return ac < bc ? -1 : 1;
  }
}

export function canonicalJson(value: CanonicalValue): string {
  if (value === null) return "null";
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") {
    if (!Number.isSafeInteger(value)) {
      throw new TypeError(`canonical values hold integers only, got ${value}`);
    }
    return String(value);
  }
  if (typeof value === "string") return escapeString(value);
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  if (typeof value === "object") {
    const keys = Object.keys(value).sort(codePointCompare);
    const parts = keys.map((k) => escapeString(k) + ":" + canonicalJson(value[k]));
    return "{" + parts.join(",") + "}";
  }
  throw new TypeError(`not a canonical value: ${String(value)}`);
}

export function sha256Hex(text: string): string {
  return createHash("sha256").update(text, "utf8").digest("hex");
}

export function canonicalDigest(value: CanonicalValue): string {
  return sha256Hex(canonicalJson(value));
}
