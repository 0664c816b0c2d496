from __future__ import annotations

import pytest

from suggestgate.errors import PendingLabel, RejectOutOfOrder, SchemaError
from suggestgate.telemetry import (
    Label,
    SessionState,
    TelemetryEvent,
    TelemetryKind,
    ingest_event,
    label_suggestion,
    parse_event_line,
    read_events_jsonl,
    record_outcome,
    window_start_for,
    write_events_jsonl,
)


def ev(kind: TelemetryKind, t: int, session: str = "s1", **payload) -> TelemetryEvent:
    return TelemetryEvent(session_id=session, timestamp=t, kind=kind, payload=payload)


def typing(t: int, chars: int = 10, duration_ms: int = 2000, session: str = "s1"):
    return ev(TelemetryKind.TYPING_BURST, t, session, chars_typed=chars, duration_ms=duration_ms)


class TestWindowing:
    def test_typing_burst_into_empty_window(self):
        state = SessionState("s1")
        ingest_event(state, typing(1_000, chars=120, duration_ms=20_000))
        assert state.open_window.chars_typed == 120
        assert state.open_window.typing_time_s == pytest.approx(20.0)

    def test_two_pauses_accumulate(self):
        state = SessionState("s1")
        ingest_event(state, ev(TelemetryKind.PAUSE, 1_000))
        ingest_event(state, ev(TelemetryKind.PAUSE, 2_000))
        assert state.open_window.pause_count == 2

    def test_minute_boundary_closes_window(self):
        # Oracle: bucket = floor(t / 60 s); an event at 61 s closes [0, 60)
        # and opens [60, 120).
        state = SessionState("s1")
        ingest_event(state, typing(5_000))
        ingest_event(state, typing(61_000))
        assert len(state.closed_windows) == 1
        closed = state.closed_windows[0]
        assert closed.window_start == 0
        assert closed.duration_s == 60
        assert state.open_window.window_start == 60_000

    def test_partition_matches_floor_oracle(self):
        # Every event lands in the window floor(t/60s); summed chars across
        # closed+open windows equal session total.
        times = [0, 59_999, 60_000, 125_000, 125_001, 240_000, 240_100]
        state = SessionState("s1", window_buffer=100)
        for t in times:
            ingest_event(state, typing(t, chars=7))
        windows = list(state.closed_windows) + [state.open_window.close()]
        expected_buckets = sorted({window_start_for(t) for t in times})
        assert [w.window_start for w in windows] == expected_buckets
        counted = {w.window_start: w.chars_typed for w in windows}
        for t in times:
            assert counted[window_start_for(t)] > 0
        assert sum(w.chars_typed for w in windows) == state.total_chars == 7 * len(times)

    def test_window_ring_buffer_caps_history(self):
        state = SessionState("s1", window_buffer=3)
        for minute in range(6):
            ingest_event(state, typing(minute * 60_000))
        assert len(state.closed_windows) == 3
        assert state.closed_windows[-1].window_start == 4 * 60_000

    def test_typing_time_clamped_to_window(self):
        state = SessionState("s1")
        ingest_event(state, typing(0, duration_ms=90_000))
        ingest_event(state, typing(61_000))
        assert state.closed_windows[0].typing_time_s == 60.0

    def test_gauges_and_counters(self):
        state = SessionState("s1")
        ingest_event(state, ev(TelemetryKind.FILE_NAV, 100, open_files=4, file_lines=320))
        ingest_event(state, ev(TelemetryKind.DIAGNOSTIC, 200, warnings=3, errors=1, breakpoints=2))
        ingest_event(state, ev(TelemetryKind.COMMAND_USE, 300, command="Undo"))
        ingest_event(state, ev(TelemetryKind.COMMAND_USE, 400, command="QuickFix"))
        ingest_event(state, ev(TelemetryKind.COMMAND_USE, 500, command="TerminalToggle"))
        ingest_event(state, ev(TelemetryKind.COMMAND_USE, 600, command="Paste"))
        ingest_event(state, ev(TelemetryKind.EDIT_APPLIED, 700, lines_added=5))
        win = state.open_window
        assert (win.open_files, win.file_lines) == (4, 320)
        assert (win.warnings, win.errors, win.breakpoints) == (3, 1, 2)
        assert (win.undo_count, win.quick_fix_count, win.terminal_toggles) == (1, 1, 1)
        assert win.palette_actions == 1
        assert win.lines_added == 5
        assert win.nav_events == 1

    def test_out_of_order_within_tolerance_accepted(self):
        state = SessionState("s1")
        ingest_event(state, typing(10_000))
        ingest_event(state, typing(6_000))  # 4 s late, tolerated
        assert state.last_activity == 10_000

    def test_out_of_order_beyond_tolerance_rejected(self):
        state = SessionState("s1")
        ingest_event(state, typing(20_000))
        with pytest.raises(RejectOutOfOrder):
            ingest_event(state, typing(14_000))

    def test_wrong_session_rejected(self):
        state = SessionState("s1")
        with pytest.raises(ValueError):
            ingest_event(state, typing(0, session="other"))


class TestSessionCounters:
    def test_suggestion_lifecycle_accept(self):
        state = SessionState("s1")
        ingest_event(state, ev(TelemetryKind.SUGGESTION_SHOWN, 1_000, suggestion_id="a"))
        ingest_event(state, ev(TelemetryKind.SUGGESTION_ACCEPTED, 4_000, suggestion_id="a"))
        assert (state.accepted_count, state.rejected_count) == (1, 0)
        assert state.suggestions_seen == 1

    def test_new_request_rejects_pending(self):
        state = SessionState("s1")
        ingest_event(state, ev(TelemetryKind.SUGGESTION_SHOWN, 1_000, suggestion_id="a"))
        ingest_event(state, ev(TelemetryKind.SUGGESTION_REQUESTED, 5_000))
        assert (state.accepted_count, state.rejected_count) == (0, 1)

    def test_passive_timeout_rejects_pending(self):
        state = SessionState("s1")
        ingest_event(state, ev(TelemetryKind.SUGGESTION_SHOWN, 1_000, suggestion_id="a"))
        ingest_event(state, typing(40_000))
        assert (state.accepted_count, state.rejected_count) == (0, 1)
        assert state.pending_suggestion is None

    def test_counters_never_exceed_seen(self):
        state = SessionState("s1")
        events = [
            ev(TelemetryKind.SUGGESTION_SHOWN, 1_000, suggestion_id="a"),
            ev(TelemetryKind.SUGGESTION_ACCEPTED, 2_000, suggestion_id="a"),
            ev(TelemetryKind.SUGGESTION_ACCEPTED, 3_000, suggestion_id="a"),  # spurious
            ev(TelemetryKind.SUGGESTION_SHOWN, 4_000, suggestion_id="b"),
            ev(TelemetryKind.SUGGESTION_SHOWN, 5_000, suggestion_id="c"),
        ]
        for event in events:
            ingest_event(state, event)
        assert state.accepted_count + state.rejected_count <= state.suggestions_seen

    def test_record_outcome_updates_counters(self):
        state = SessionState("s1")
        record_outcome(state, accepted=True)
        record_outcome(state, accepted=False)
        assert (state.accepted_count, state.rejected_count, state.suggestions_seen) == (1, 1, 2)


class TestLabeling:
    def test_accept_before_new_request(self):
        later = [ev(TelemetryKind.SUGGESTION_ACCEPTED, 4_000)]
        assert label_suggestion(0, later) is Label.ACCEPTED

    def test_new_request_is_explicit_rejection(self):
        later = [ev(TelemetryKind.SUGGESTION_REQUESTED, 10_000)]
        assert label_suggestion(0, later) is Label.REJECTED_EXPLICIT

    def test_silence_is_passive_rejection(self):
        later = [ev(TelemetryKind.FILE_NAV, 31_000)]
        assert label_suggestion(0, later) is Label.REJECTED_PASSIVE

    def test_late_accept_already_passively_rejected(self):
        later = [ev(TelemetryKind.SUGGESTION_ACCEPTED, 31_000)]
        assert label_suggestion(0, later) is Label.REJECTED_PASSIVE

    def test_activity_resets_inactivity_timer(self):
        later = [
            typing(20_000),
            ev(TelemetryKind.SUGGESTION_ACCEPTED, 45_000),
        ]
        assert label_suggestion(0, later) is Label.ACCEPTED

    def test_navigation_does_not_reset_timer(self):
        later = [
            ev(TelemetryKind.FILE_NAV, 20_000),
            ev(TelemetryKind.SUGGESTION_ACCEPTED, 45_000),
        ]
        assert label_suggestion(0, later) is Label.REJECTED_PASSIVE

    def test_short_stream_is_pending(self):
        with pytest.raises(PendingLabel):
            label_suggestion(0, [typing(5_000)])

    def test_empty_stream_is_pending(self):
        with pytest.raises(PendingLabel):
            label_suggestion(0, [])

    def test_trailing_silence_is_passive(self):
        later = [typing(1_000), ev(TelemetryKind.FILE_NAV, 35_000)]
        assert label_suggestion(0, later) is Label.REJECTED_PASSIVE

    def test_deterministic(self):
        later = [typing(3_000), ev(TelemetryKind.SUGGESTION_REQUESTED, 8_000)]
        first = label_suggestion(0, list(later))
        assert all(label_suggestion(0, list(later)) is first for _ in range(5))

    def test_totality_with_quiet_tail(self):
        # Any stream whose tail holds >= 30 s with no typing/command
        # interaction labels without Pending.
        base = [typing(2_000), ev(TelemetryKind.FILE_NAV, 9_000)]
        later = base + [ev(TelemetryKind.DIAGNOSTIC, 40_000, warnings=1, errors=0)]
        assert label_suggestion(0, later) is Label.REJECTED_PASSIVE


class TestJsonl:
    def test_round_trip_lossless(self, tmp_path):
        events = [
            typing(1_000, chars=42, duration_ms=900),
            ev(TelemetryKind.DIAGNOSTIC, 2_000, warnings=1, errors=0, breakpoints=3),
            ev(TelemetryKind.SUGGESTION_SHOWN, 3_000, suggestion_id="x1"),
        ]
        path = tmp_path / "events.jsonl"
        write_events_jsonl(events, path)
        assert list(read_events_jsonl(path)) == events

    def test_unknown_fields_ignored(self):
        event = parse_event_line(
            '{"session_id":"s1","timestamp":5,"kind":"Pause","payload":{},"extra":"ignored"}'
        )
        assert event.kind is TelemetryKind.PAUSE

    def test_malformed_line_raises_schema_error(self):
        with pytest.raises(SchemaError):
            parse_event_line("not json")
        with pytest.raises(SchemaError):
            parse_event_line('{"session_id":"s1","timestamp":5,"kind":"NoSuchKind"}')
        with pytest.raises(SchemaError):
            parse_event_line('["a","list"]')
