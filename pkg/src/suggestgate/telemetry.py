"""Editor telemetry: event taxonomy, per-session state, one-minute windows, labeling.

Events are content-agnostic: payloads carry counts and durations only, never
source text, prompts, or identifiers. Windows are wall-clock aligned to
``floor(timestamp / 60 s)`` so replays are deterministic.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional

from .errors import PendingLabel, RejectOutOfOrder, SchemaError

WINDOW_SECONDS = 60
WINDOW_MS = WINDOW_SECONDS * 1000

#: Passive rejection: a suggestion neither accepted nor superseded within
#: this much inactivity is labeled rejected.
PASSIVE_REJECT_MS = 30_000

#: Collector-side inter-keystroke gap that counts as a pause (config default).
PAUSE_GAP_SECONDS = 2.0

#: Events may arrive at most this far behind the session's last activity.
OUT_OF_ORDER_TOLERANCE_MS = 5_000

#: Ring-buffer size for closed windows kept per session.
DEFAULT_WINDOW_BUFFER = 5


class TelemetryKind(str, Enum):
    TYPING_BURST = "TypingBurst"
    PAUSE = "Pause"
    FILE_NAV = "FileNav"
    COMMAND_USE = "CommandUse"
    DIAGNOSTIC = "Diagnostic"
    SUGGESTION_SHOWN = "SuggestionShown"
    SUGGESTION_ACCEPTED = "SuggestionAccepted"
    SUGGESTION_REQUESTED = "SuggestionRequested"
    EDIT_APPLIED = "EditApplied"


class Command(str, Enum):
    UNDO = "Undo"
    QUICK_FIX = "QuickFix"
    TERMINAL_TOGGLE = "TerminalToggle"
    PALETTE_ACTION = "PaletteAction"
    COPY = "Copy"
    PASTE = "Paste"


class Label(str, Enum):
    ACCEPTED = "Accepted"
    REJECTED_EXPLICIT = "RejectedExplicit"
    REJECTED_PASSIVE = "RejectedPassive"


#: Events that count as developer interaction for the passive-rejection
#: timer. Navigation and diagnostics do not reset inactivity.
_ACTIVITY_KINDS = frozenset(
    {
        TelemetryKind.TYPING_BURST,
        TelemetryKind.COMMAND_USE,
        TelemetryKind.EDIT_APPLIED,
    }
)


@dataclass(frozen=True)
class TelemetryEvent:
    """One timestamped editor interaction fact.

    ``timestamp`` is milliseconds since epoch. ``payload`` holds
    kind-specific numeric fields (see the collector contract); it never
    contains code, prompt text, or file paths.
    """

    session_id: str
    timestamp: int
    kind: TelemetryKind
    payload: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "timestamp": self.timestamp,
            "kind": self.kind.value,
            "payload": dict(self.payload),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "TelemetryEvent":
        """Build an event from a decoded JSON object; unknown fields ignored."""
        try:
            kind = TelemetryKind(obj["kind"])
            return cls(
                session_id=str(obj["session_id"]),
                timestamp=int(obj["timestamp"]),
                kind=kind,
                payload=dict(obj.get("payload") or {}),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"bad telemetry event: {exc}") from exc


@dataclass(frozen=True)
class BehaviorWindow:
    """One-minute aggregate of telemetry counters; immutable once closed.

    Sums: chars_typed, typing_time_s, pause_count, nav_events, command
    counters, lines_added. Gauges (last value seen in the window):
    warnings, errors, breakpoints, open_files, file_lines.
    """

    session_id: str
    window_start: int  # ms, multiple of WINDOW_MS
    duration_s: int
    chars_typed: int
    typing_time_s: float
    pause_count: int
    nav_events: int
    undo_count: int
    quick_fix_count: int
    terminal_toggles: int
    palette_actions: int
    warnings: int
    errors: int
    breakpoints: int
    lines_added: int
    file_lines: int
    open_files: int


class _OpenWindow:
    """Mutable accumulator for the window currently being filled."""

    __slots__ = (
        "session_id",
        "window_start",
        "chars_typed",
        "typing_time_s",
        "pause_count",
        "nav_events",
        "undo_count",
        "quick_fix_count",
        "terminal_toggles",
        "palette_actions",
        "warnings",
        "errors",
        "breakpoints",
        "lines_added",
        "file_lines",
        "open_files",
    )

    def __init__(self, session_id: str, window_start: int) -> None:
        self.session_id = session_id
        self.window_start = window_start
        self.chars_typed = 0
        self.typing_time_s = 0.0
        self.pause_count = 0
        self.nav_events = 0
        self.undo_count = 0
        self.quick_fix_count = 0
        self.terminal_toggles = 0
        self.palette_actions = 0
        self.warnings = 0
        self.errors = 0
        self.breakpoints = 0
        self.lines_added = 0
        self.file_lines = 0
        self.open_files = 0

    def close(self) -> BehaviorWindow:
        return BehaviorWindow(
            session_id=self.session_id,
            window_start=self.window_start,
            duration_s=WINDOW_SECONDS,
            chars_typed=self.chars_typed,
            typing_time_s=min(self.typing_time_s, float(WINDOW_SECONDS)),
            pause_count=self.pause_count,
            nav_events=self.nav_events,
            undo_count=self.undo_count,
            quick_fix_count=self.quick_fix_count,
            terminal_toggles=self.terminal_toggles,
            palette_actions=self.palette_actions,
            warnings=self.warnings,
            errors=self.errors,
            breakpoints=self.breakpoints,
            lines_added=self.lines_added,
            file_lines=self.file_lines,
            open_files=self.open_files,
        )


@dataclass
class SessionState:
    """Accumulated per-session counters plus the window ring buffer.

    Mutated by exactly one writer at a time; snapshots read by the feature
    builder are plain numbers and the most recent closed window, both of
    which are immutable.
    """

    session_id: str
    accepted_count: int = 0
    rejected_count: int = 0
    total_typing_duration: float = 0.0
    total_chars: int = 0
    suggestions_seen: int = 0
    last_activity: int = 0
    window_buffer: int = DEFAULT_WINDOW_BUFFER
    closed_windows: deque = field(default_factory=deque)
    open_window: Optional[_OpenWindow] = None
    # Unresolved suggestion, if any: (suggestion_id, shown_at_ms, inactivity_anchor_ms).
    pending_suggestion: Optional[tuple] = None

    def __post_init__(self) -> None:
        if not isinstance(self.closed_windows, deque) or self.closed_windows.maxlen != self.window_buffer:
            self.closed_windows = deque(self.closed_windows, maxlen=self.window_buffer)

    def latest_window(self) -> Optional[BehaviorWindow]:
        return self.closed_windows[-1] if self.closed_windows else None


def window_start_for(timestamp_ms: int) -> int:
    """Wall-clock aligned window bucket: floor(t / 60 s)."""
    return (timestamp_ms // WINDOW_MS) * WINDOW_MS


def _check_passive_expiry(state: SessionState, now_ms: int) -> None:
    # The 30 s timer measures inactivity: it anchors at the shown time and
    # re-anchors on typing/command interaction, not on navigation or
    # diagnostics. Expiry is detected at the next observed event.
    if state.pending_suggestion is None:
        return
    _, _, anchor = state.pending_suggestion
    if now_ms - anchor >= PASSIVE_REJECT_MS:
        state.pending_suggestion = None
        state.rejected_count += 1


def ingest_event(
    state: SessionState,
    event: TelemetryEvent,
    out_of_order_tolerance_ms: int = OUT_OF_ORDER_TOLERANCE_MS,
) -> SessionState:
    """Fold one event into the session state, closing windows on minute rollover.

    Raises RejectOutOfOrder if the event is older than the session's last
    activity by more than the tolerance (corrupt stream).
    """
    if event.session_id != state.session_id:
        raise ValueError(
            f"event for session {event.session_id!r} fed to state {state.session_id!r}"
        )
    if event.timestamp < state.last_activity - out_of_order_tolerance_ms:
        raise RejectOutOfOrder(
            f"event at {event.timestamp} precedes last activity "
            f"{state.last_activity} by more than {out_of_order_tolerance_ms} ms"
        )

    bucket = window_start_for(event.timestamp)
    if state.open_window is None:
        state.open_window = _OpenWindow(state.session_id, bucket)
    elif bucket > state.open_window.window_start:
        state.closed_windows.append(state.open_window.close())
        state.open_window = _OpenWindow(state.session_id, bucket)

    win = state.open_window
    payload = event.payload
    kind = event.kind

    _check_passive_expiry(state, event.timestamp)

    if kind is TelemetryKind.TYPING_BURST:
        chars = int(payload.get("chars_typed", 0))
        duration_s = int(payload.get("duration_ms", 0)) / 1000.0
        win.chars_typed += chars
        win.typing_time_s += duration_s
        state.total_chars += chars
        state.total_typing_duration += duration_s
    elif kind is TelemetryKind.PAUSE:
        win.pause_count += 1
    elif kind is TelemetryKind.FILE_NAV:
        win.nav_events += 1
        win.open_files = int(payload.get("open_files", win.open_files))
        win.file_lines = int(payload.get("file_lines", win.file_lines))
    elif kind is TelemetryKind.COMMAND_USE:
        command = payload.get("command")
        if command == Command.UNDO.value:
            win.undo_count += 1
        elif command == Command.QUICK_FIX.value:
            win.quick_fix_count += 1
        elif command == Command.TERMINAL_TOGGLE.value:
            win.terminal_toggles += 1
        else:
            # PaletteAction, Copy, Paste: generic command surface.
            win.palette_actions += 1
    elif kind is TelemetryKind.DIAGNOSTIC:
        win.warnings = int(payload.get("warnings", 0))
        win.errors = int(payload.get("errors", 0))
        win.breakpoints = int(payload.get("breakpoints", win.breakpoints))
    elif kind is TelemetryKind.EDIT_APPLIED:
        win.lines_added += int(payload.get("lines_added", 0))
    elif kind is TelemetryKind.SUGGESTION_SHOWN:
        if state.pending_suggestion is not None:
            # A newly shown suggestion supersedes the pending one.
            state.pending_suggestion = None
            state.rejected_count += 1
        state.suggestions_seen += 1
        state.pending_suggestion = (
            payload.get("suggestion_id"),
            event.timestamp,
            event.timestamp,
        )
    elif kind is TelemetryKind.SUGGESTION_ACCEPTED:
        if state.pending_suggestion is not None:
            state.pending_suggestion = None
            state.accepted_count += 1
    elif kind is TelemetryKind.SUGGESTION_REQUESTED:
        if state.pending_suggestion is not None:
            # A fresh request bypasses the pending suggestion.
            state.pending_suggestion = None
            state.rejected_count += 1

    if kind in _ACTIVITY_KINDS and state.pending_suggestion is not None:
        sid, shown_at, _ = state.pending_suggestion
        state.pending_suggestion = (sid, shown_at, event.timestamp)

    state.last_activity = max(state.last_activity, event.timestamp)
    return state


def record_outcome(state: SessionState, accepted: bool) -> None:
    """Register a delivered suggestion's outcome directly.

    Used by the service's ``outcome`` messages and by replay, where the
    suggestion lifecycle is simulated rather than observed as events.
    """
    state.suggestions_seen += 1
    if accepted:
        state.accepted_count += 1
    else:
        state.rejected_count += 1


def label_suggestion(shown_at: int, later_events: Iterable[TelemetryEvent]) -> Label:
    """Decide a shown suggestion's terminal label from the events after it.

    Accepted if a SuggestionAccepted arrives before any new
    SuggestionRequested; explicitly rejected if a new request comes first;
    passively rejected once 30 s pass without interaction. Raises
    PendingLabel when the stream ends before any of those conditions.
    """
    inactivity_start = shown_at
    last_seen = shown_at
    for event in later_events:
        if event.timestamp < shown_at:
            raise ValueError("later_events must not precede shown_at")
        if event.timestamp - inactivity_start >= PASSIVE_REJECT_MS:
            return Label.REJECTED_PASSIVE
        if event.kind is TelemetryKind.SUGGESTION_ACCEPTED:
            return Label.ACCEPTED
        if event.kind is TelemetryKind.SUGGESTION_REQUESTED:
            return Label.REJECTED_EXPLICIT
        if event.kind in _ACTIVITY_KINDS:
            inactivity_start = event.timestamp
        last_seen = event.timestamp
    if last_seen - inactivity_start >= PASSIVE_REJECT_MS:
        return Label.REJECTED_PASSIVE
    raise PendingLabel(
        f"stream ended {last_seen - shown_at} ms after suggestion; not labelable yet"
    )


def write_events_jsonl(events: Iterable[TelemetryEvent], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps(event.to_json_dict(), separators=(",", ":")))
            fh.write("\n")


def read_events_jsonl(path) -> Iterator[TelemetryEvent]:
    """Yield events from a JSONL log; raises SchemaError per bad line."""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            yield parse_event_line(line)


def parse_event_line(line: str) -> TelemetryEvent:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line is not JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("line is not a JSON object")
    return TelemetryEvent.from_json_dict(obj)
