/** Board console library: protocol client, converging replica, renderer. */

export {
  canonicalDigest,
  canonicalJson,
  codePointCompare,
  escapeString,
  sha256Hex,
  type CanonicalValue,
} from "./canonical.js";
export {
  AuthorizationError,
  DivergenceError,
  GapError,
  HttpError,
  QueryError,
  TransitionError,
  ValidationError,
} from "./errors.js";
export {
  Topology,
  intToIpv4,
  ipv4ToInt,
  type AssetDoc,
  type MissionDoc,
  type SubZoneDoc,
  type TopologyDoc,
  type ZoneDoc,
} from "./topology.js";
export {
  cidrRange,
  evaluateQuery,
  formatQuery,
  globMatch,
  parseQuery,
  type QueryExpr,
} from "./query.js";
export {
  BADGE_ICONS,
  CATEGORY_ORDER,
  MAX_ACTIVE_QUERIES,
  NEUTRAL_CAPSULE,
  STATUS_COLORS,
  affectedAssets,
  aggregateBadges,
  buildMenu,
  classifyMissionImpact,
  computeStrip,
  deriveLayers,
  individualBadges,
  menuWindow,
  pipeColor,
  quantizeFraction,
  subjectSubZone,
  visiblePipes,
  type AggregateBadge,
  type AlertCategory,
  type AlertRec,
  type AlertStatus,
  type BoardLayers,
  type MenuEntry,
  type NoteRec,
  type PipeEndpoints,
  type PipeRec,
  type QueryHighlight,
  type QueryRec,
  type SubjectKind,
  type SubjectRec,
  type TicketRec,
  type ViewRec,
} from "./model.js";
export {
  BoardClient,
  makeCommand,
  type BatchEntry,
  type CommandRecord,
  type DeltaRecord,
  type HealthResponse,
  type IssuerRec,
  type OutcomeRec,
  type SnapshotRecord,
  type SubmitResponse,
} from "./protocol.js";
export { BoardReplica, RESERVED_ID_PREFIX, VIEW_CONTROL_KINDS, type StoredQuery } from "./replica.js";
export {
  buildRenderModel,
  renderHtml,
  type RenderModel,
  type RenderOptions,
  type RenderedMenuEntry,
  type RenderedPipe,
  type RenderedQueryTab,
  type RenderedStrip,
  type RenderedSubZone,
  type RenderedTab,
  type RenderedZone,
} from "./render.js";
export { BoardConsole, type Rejection } from "./console.js";
