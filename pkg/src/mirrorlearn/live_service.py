"""Real-time session service around the step engine.

A single fixed-cadence asyncio task owns the learner and environment and
advances them once per tick.  Connected clients talk to that task only
through mailboxes (inbound control value and feedback events) and
per-subscriber outbound queues (display frames and acknowledgements), so
client I/O can never block a learning update.  Ended sessions are persisted
in the batch JSONL schema, one subdirectory per session id so repeated live
sessions with the same condition and seed do not overwrite each other.

Run it with ``mirrorlearn serve`` or mount :func:`create_app` under any
ASGI server.
"""

from __future__ import annotations

import asyncio
import logging
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from . import experiment
from .actor_critic import DivergenceError
from .experiment import (
    ExperimentConfig,
    InteractionLoop,
    NoFeedback,
    SimulatedControl,
    StepRecord,
    rng_streams,
)
from .trainer_sim import SOURCE_HUMAN, FeedbackEvent

logger = logging.getLogger(__name__)

FEEDBACK_KINDS = ("feedback_reward", "feedback_punish")
EVENT_KINDS = FEEDBACK_KINDS + ("control_value",)

# Outbound queue depth per websocket client.  A client that falls further
# behind than this starts losing the oldest frames (and is told how many).
SUBSCRIBER_QUEUE_SIZE = 256


# --- inbound mailboxes --------------------------------------------------------


class LatestValueControl:
    """Control source fed by the client; the loop reads the last value set.

    Starts at 0.0, matching the ideal trace at the start of a period.
    """

    def __init__(self, initial: float = 0.0):
        self._value = float(initial)

    def set(self, value: float) -> float:
        self._value = min(max(float(value), 0.0), 1.0)
        return self._value

    def value(self, t: int) -> float:
        return self._value


class MailboxFeedback:
    """Holds at most one pending feedback value; the newest press wins.

    ``poll`` consumes the pending value and stamps it with the tick at which
    it enters the update, which is how "applied at the next update" is
    realized.
    """

    def __init__(self):
        self._pending: Optional[float] = None

    def push(self, value: float) -> None:
        self._pending = value

    def poll(self, t: int, in_band: bool) -> Optional[FeedbackEvent]:
        if self._pending is None:
            return None
        value, self._pending = self._pending, None
        return FeedbackEvent(t=t, value=value, source=SOURCE_HUMAN)


# --- outbound fan-out ---------------------------------------------------------


class _Subscriber:
    """One client's outbound queue with drop-oldest overflow accounting."""

    def __init__(self, maxsize: int = SUBSCRIBER_QUEUE_SIZE):
        self.queue: asyncio.Queue[dict] = asyncio.Queue(maxsize=maxsize)
        self.dropped = 0

    def push(self, message: dict) -> None:
        while True:
            try:
                self.queue.put_nowait(message)
                return
            except asyncio.QueueFull:
                try:
                    evicted = self.queue.get_nowait()
                except asyncio.QueueEmpty:
                    continue
                if evicted.get("type") == "frame":
                    self.dropped += 1

    def take_drop_notice(self) -> Optional[dict]:
        if not self.dropped:
            return None
        count, self.dropped = self.dropped, 0
        return {"type": "frame_drop", "count": count}


# --- session ------------------------------------------------------------------


class LiveSession:
    """One running (or finished) live session.

    The tick task is the only code that touches the learner and environment;
    everything else communicates through the mailboxes above.
    """

    def __init__(self, session_id: str, config: ExperimentConfig):
        if config.condition.is_simulated:
            raise ValueError(
                f"condition {config.condition.value} is headless; live sessions "
                "take a human condition (C, C+F, F) - use the batch runner for "
                "simulated conditions"
            )
        self.id = session_id
        self.config = config
        self.status = "running"
        self.records: list[StepRecord] = []
        self.overruns = 0
        self.subscribers: list[_Subscriber] = []
        self.result: Optional[dict] = None

        rngs = rng_streams(config.seed)
        if config.condition.control_is_simulated:
            self.control_mailbox: Optional[LatestValueControl] = None
            control = SimulatedControl(config.emg, config.env, rngs["emg"])
        else:
            self.control_mailbox = LatestValueControl()
            control = self.control_mailbox
        self.accepts_feedback = config.condition.has_feedback
        self.feedback_mailbox = MailboxFeedback()
        feedback = self.feedback_mailbox if self.accepts_feedback else NoFeedback()
        self.loop = InteractionLoop(config, control, feedback, rngs["policy"])

        self._stop_requested = False
        self._divergence: Optional[str] = None
        self._abs_err_sum = 0.0
        self._feedback_total = 0
        self._done = asyncio.Event()
        self._task: Optional[asyncio.Task] = None

    def start(self) -> None:
        self._task = asyncio.get_running_loop().create_task(self._run())

    # -- tick task ----------------------------------------------------------

    async def _run(self) -> None:
        tick_s = self.config.tick_ms / 1000.0
        aloop = asyncio.get_running_loop()
        next_deadline = aloop.time()
        try:
            while not self._stop_requested and len(self.records) < self.config.total_steps:
                record = self.loop.step()
                self.records.append(record)
                self._publish(self._frame(record))
                next_deadline += tick_s
                delay = next_deadline - aloop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    # Next tick fires immediately; no burst of catch-up ticks.
                    self.overruns += 1
                    next_deadline = aloop.time()
                    await asyncio.sleep(0)
            self.status = "ended" if self._stop_requested else "completed"
        except DivergenceError as exc:
            self.status = "diverged"
            self._divergence = str(exc)
            logger.warning("session %s diverged: %s", self.id, exc)
        except Exception as exc:  # pragma: no cover - defensive
            self.status = "error"
            self._divergence = str(exc)
            logger.exception("session %s crashed", self.id)
        finally:
            self._finalize()

    def _frame(self, record: StepRecord) -> dict:
        self._abs_err_sum += abs(record.theta_left - record.theta_target)
        if record.feedback_event is not None:
            self._feedback_total += 1
        return {
            "type": "frame",
            "t": record.t,
            "theta_target": record.theta_target,
            "theta_left": record.theta_left,
            "emg": record.emg,
            "mu": record.mu,
            "sigma": record.sigma,
            "r_mdp": record.r_mdp,
            "h": record.h,
            "r_total": record.r_total,
            "running_mae": self._abs_err_sum / len(self.records),
            "total_feedback": self._feedback_total,
        }

    def _publish(self, message: dict) -> None:
        for sub in self.subscribers:
            sub.push(message)

    def _finalize(self) -> None:
        # Whatever happens while summarizing/persisting, subscribers must see
        # session_end and stop() must unblock, or clients hang forever.
        try:
            summary = experiment.summarize_run(self.records, self.config)
            log_path = None
            if self.records:
                out_dir = Path(self.config.out_dir) / "live" / self.id
                log_path = experiment.write_run(self.records, self.config, out_dir)
            summary_dict = summary.to_dict()
        except Exception as exc:  # pragma: no cover - defensive
            logger.exception("session %s failed to persist", self.id)
            self.status = "error"
            self._divergence = str(exc)
            log_path = None
            summary_dict = None
        self.result = {
            "session_id": self.id,
            "status": self.status,
            "condition": self.config.condition.value,
            "steps_completed": len(self.records),
            "truncated": len(self.records) < self.config.total_steps,
            "overruns": self.overruns,
            "log_path": None if log_path is None else str(log_path),
            "summary": summary_dict,
        }
        if self._divergence is not None:
            self.result["error"] = self._divergence
        self._publish(self.end_message())
        self._done.set()

    def end_message(self) -> dict:
        return {
            "type": "session_end",
            "status": self.status,
            "steps_completed": len(self.records),
            "truncated": len(self.records) < self.config.total_steps,
        }

    # -- client-facing operations -------------------------------------------

    async def stop(self) -> dict:
        """Request the loop to end and wait for persistence; idempotent."""
        self._stop_requested = True
        await self._done.wait()
        assert self.result is not None
        return self.result

    def subscribe(self) -> _Subscriber:
        sub = _Subscriber()
        self.subscribers.append(sub)
        if self.status != "running":
            sub.push(self.end_message())
        return sub

    def unsubscribe(self, sub: _Subscriber) -> None:
        if sub in self.subscribers:
            self.subscribers.remove(sub)

    def apply_event(self, message: dict) -> dict:
        """Apply one client event and return its acknowledgement.

        Mailbox mutation happens synchronously here, so an event is picked
        up no later than the update after its acknowledgement is queued.
        """
        kind = message.get("kind")
        ack: dict = {"type": "ack", "kind": kind, "t": self.loop.t, "applied": False}
        if "client_time" in message:
            ack["client_time"] = message["client_time"]
        if kind not in EVENT_KINDS:
            ack["note"] = f"unknown event kind {kind!r}"
            return ack
        if self.status != "running":
            ack["note"] = "session is not running; event dropped"
            logger.warning("event %s for %s session %s dropped", kind, self.status, self.id)
            return ack
        if kind == "control_value":
            if self.control_mailbox is None:
                ack["note"] = (
                    f"control is simulated in condition {self.config.condition.value}"
                )
            else:
                try:
                    value = float(message["value"])
                except (KeyError, TypeError, ValueError):
                    ack["note"] = "control_value requires a numeric 'value'"
                    return ack
                ack["value"] = self.control_mailbox.set(value)
                ack["applied"] = True
        else:
            if not self.accepts_feedback:
                ack["note"] = (
                    f"feedback is ignored in condition {self.config.condition.value}"
                )
            else:
                fb = self.config.feedback
                value = fb.reward_value if kind == "feedback_reward" else fb.punish_value
                self.feedback_mailbox.push(value)
                ack["value"] = value
                ack["applied"] = True
        return ack


# --- application --------------------------------------------------------------


@dataclass
class _ServiceState:
    default_config: ExperimentConfig
    auth_token: Optional[str]
    sessions: dict[str, LiveSession] = field(default_factory=dict)

    @property
    def active(self) -> Optional[LiveSession]:
        for session in self.sessions.values():
            if session.status == "running":
                return session
        return None


_FALLBACK_INDEX = """<!doctype html>
<html><head><title>mirrorlearn</title></head>
<body style="font-family: sans-serif; max-width: 40em; margin: 4em auto;">
<h1>mirrorlearn live service</h1>
<p>The service is up, but no built web client was found.  Build the frontend
(<code>npm run build</code> in <code>frontend/</code>) and restart, or talk to
the HTTP and websocket endpoints directly:</p>
<ul>
<li><code>POST /session</code> &mdash; start a session</li>
<li><code>GET /session/{id}/stream</code> &mdash; websocket stream</li>
<li><code>DELETE /session/{id}</code> &mdash; end and summarize</li>
<li><code>GET /healthz</code></li>
</ul>
</body></html>
"""


def _default_static_dir() -> Optional[Path]:
    # repo layout: src/mirrorlearn/live_service.py -> ../../frontend/dist
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def create_app(
    default_config: Optional[ExperimentConfig] = None,
    auth_token: Optional[str] = None,
    static_dir: Optional[Path] = None,
) -> FastAPI:
    """Build the ASGI app.

    ``default_config`` seeds every field a session request leaves out;
    ``auth_token``, when set, must accompany session creation as
    ``auth_token`` in the request body.  ``static_dir`` overrides where the
    built web client is looked for.
    """
    state = _ServiceState(
        default_config=default_config or ExperimentConfig(),
        auth_token=auth_token,
    )
    app = FastAPI(title="mirrorlearn live service")
    app.state.service = state

    @app.get("/healthz")
    async def healthz() -> dict:
        active = state.active
        return {
            "status": "ok",
            "active_session": None if active is None else active.id,
        }

    @app.post("/session", status_code=201)
    async def start_session(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            body = None
        if body is None:
            body = {}
        if not isinstance(body, dict):
            raise HTTPException(status_code=422, detail="body must be a JSON object")
        token = body.pop("auth_token", None)
        if state.auth_token is not None and token != state.auth_token:
            raise HTTPException(status_code=401, detail="missing or wrong auth token")
        merged = state.default_config.to_dict()
        merged.update(body)
        try:
            config = ExperimentConfig.from_dict(merged)
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        if config.condition.is_simulated:
            raise HTTPException(
                status_code=422,
                detail=(
                    f"condition {config.condition.value} is headless; run it with "
                    "the batch CLI (`mirrorlearn run`). Live sessions need a human "
                    "condition: C, C+F, or F."
                ),
            )
        if state.active is not None:
            raise HTTPException(
                status_code=409,
                detail=f"session {state.active.id} is already running; end it first",
            )
        session = LiveSession(secrets.token_hex(8), config)
        state.sessions[session.id] = session
        session.start()
        return {
            "session_id": session.id,
            "condition": config.condition.value,
            "tick_ms": config.tick_ms,
            "total_steps": config.total_steps,
            "stream_path": f"/session/{session.id}/stream",
        }

    @app.delete("/session/{session_id}")
    async def end_session(session_id: str) -> dict:
        session = state.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return await session.stop()

    @app.websocket("/session/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str) -> None:
        await websocket.accept()
        session = state.sessions.get(session_id)
        if session is None:
            await websocket.send_json(
                {"type": "error", "error": f"no session {session_id}"}
            )
            await websocket.close(code=4404)
            return
        sub = session.subscribe()
        sender = asyncio.create_task(_send_outbound(websocket, sub))
        try:
            while True:
                try:
                    message = await websocket.receive_json()
                except ValueError:
                    sub.push({"type": "ack", "applied": False, "note": "invalid JSON"})
                    continue
                if not isinstance(message, dict):
                    message = {}
                sub.push(session.apply_event(message))
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            sender.cancel()
            session.unsubscribe(sub)

    static = static_dir if static_dir is not None else _default_static_dir()
    if static is not None and Path(static).is_dir():
        app.mount("/", StaticFiles(directory=str(static), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        async def index() -> str:
            return _FALLBACK_INDEX

    return app


async def _send_outbound(websocket: WebSocket, sub: _Subscriber) -> None:
    """Drain one subscriber queue onto its socket, surfacing drop notices."""
    try:
        while True:
            message = await sub.queue.get()
            notice = sub.take_drop_notice()
            if notice is not None:
                await websocket.send_json(notice)
            await websocket.send_json(message)
    except (WebSocketDisconnect, RuntimeError):
        pass
