"""Interactive what-if exploration over b-states."""

from __future__ import annotations

import cmd
import shlex
from dataclasses import dataclass, field

from . import statedoc
from .errors import MapkitError
from .kripke import describe, satisfies, to_dot
from .lang import Theory, parse_formula
from .transition import BState, frame_of_reference, run_plan, step_bstate


@dataclass
class Session:
    theory: Theory
    initial: BState
    history: list = field(default_factory=list)  # (action, b-state after it)

    @property
    def current(self) -> BState:
        return self.history[-1][1] if self.history else self.initial

    @property
    def actions(self) -> list[str]:
        return [a for a, _ in self.history]

    def do(self, action: str) -> BState:
        """Step every state; a failed step leaves the session untouched."""
        if action not in self.theory.actions:
            raise MapkitError(f"unknown action {action!r}")
        nxt = step_bstate(self.theory, action, self.current)
        if nxt.failed:
            raise MapkitError(f"{action} is not executable in every current state")
        self.history.append((action, nxt))
        return nxt

    def undo(self) -> BState:
        if not self.history:
            raise MapkitError("nothing to undo")
        self.history.pop()
        return self.current

    def replay(self) -> BState:
        return run_plan(self.theory, self.actions, self.initial)

    def holds(self, text: str) -> list[bool]:
        phi = parse_formula(text, self.theory.signature)
        return [satisfies(s, phi) for s in self.current]

    def frames(self, action: str) -> list[str]:
        if action not in self.theory.actions:
            raise MapkitError(f"unknown action {action!r}")
        return [str(frame_of_reference(self.theory, action, s)) for s in self.current]

    def load(self, path) -> None:
        """Start over from the b-state stored in a state document."""
        self.initial = BState(statedoc.load(path))
        self.history.clear()


class Repl(cmd.Cmd):
    intro = "mapkit session; type help or ? for commands."
    prompt = "mapkit> "

    def __init__(self, session: Session, **kw):
        super().__init__(**kw)
        self.session = session

    def _say(self, text: str) -> None:
        print(text, file=self.stdout)

    def onecmd(self, line):
        # a failing command never corrupts the session
        try:
            return super().onecmd(line)
        except (MapkitError, OSError, ValueError) as exc:
            self._say(f"error: {exc}")
            return False

    def _counts(self, bs: BState) -> str:
        return ", ".join(str(len(s.structure.worlds)) for s in bs) + " worlds"

    def do_do(self, arg):
        """do ACTION: execute an action in every current state."""
        action = arg.strip().replace(" ", "")
        frames = self.session.frames(action)
        bs = self.session.do(action)
        self._say(f"frame {' | '.join(sorted(set(frames)))}; {len(bs)} state(s), {self._counts(bs)}")

    def do_undo(self, arg):
        """undo: go back one action."""
        bs = self.session.undo()
        self._say(f"{len(bs)} state(s), {self._counts(bs)}")

    def do_show(self, arg):
        """show [dot]: print the current states."""
        for k, s in enumerate(self.session.current):
            self._say(to_dot(s, f"state_{k}") if arg.strip() == "dot" else f"-- state {k}\n{describe(s)}")

    def do_holds(self, arg):
        """holds FORMULA: evaluate a formula at every current state."""
        vals = self.session.holds(arg)
        if all(vals):
            self._say("true")
        elif not any(vals):
            self._say("false")
        else:
            self._say(f"mixed: true in {sum(vals)} of {len(vals)} states")

    def do_frames(self, arg):
        """frames ACTION: frame of reference (full, partial, oblivious) per state."""
        for k, f in enumerate(self.session.frames(arg.strip().replace(" ", ""))):
            self._say(f"state {k}: {f}")

    def do_history(self, arg):
        """history: actions executed so far."""
        self._say("; ".join(self.session.actions) or "[]")

    def do_save(self, arg):
        """save PATH: write the current b-state as a JSON state document."""
        (path,) = shlex.split(arg)
        statedoc.save(path, list(self.session.current))
        self._say(f"saved {len(self.session.current)} state(s) to {path}")

    def do_load(self, arg):
        """load PATH: restart from a saved b-state."""
        (path,) = shlex.split(arg)
        self.session.load(path)
        self._say(f"loaded {len(self.session.current)} state(s)")

    def do_quit(self, arg):
        """quit: leave the session."""
        return True

    do_exit = do_quit
    do_EOF = do_quit

    def emptyline(self):
        return False
