"""Stack of inverse actions enabling ordered, fine-grained rollback.

Every write pushes an entry holding the synthesized inverse command plus a
fragment of the pod state it may destroy. Rollback walks the stack in strict
reverse order, executing each inverse through the normal write path. The
fragments close the one gap reconciliation cannot: pods recreated under fresh
names come back clean, so a transient fault pinned to a destroyed pod is
re-applied from the fragment to restore the checkpointed state exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import commands as cmdmod
from .cluster import ClusterState, reconcile
from .commands import Command

logger = logging.getLogger(__name__)

NO_MORE_ACTIONS = "No more actions to rollback."


class InverseFailed(Exception):
    """An inverse was rejected by the environment; rollback cannot proceed."""


@dataclass(frozen=True)
class PodFragment:
    owner: str
    ordinal: int
    poisoned: bool
    restarts: int


@dataclass
class UndoEntry:
    original: Command
    inverse: Command | None  # None is the recorded no-op marker
    pod_fragments: tuple[PodFragment, ...] = ()

    def summary(self) -> dict:
        return {
            "original": self.original.text,
            "inverse": self.inverse.text if self.inverse else "no-op",
        }


_POD_TOUCHING_VERBS = frozenset({"scale", "rollout-restart"})


def pod_fragments_for(state: ClusterState, cmd: Command) -> tuple[PodFragment, ...]:
    """Capture the pod overlay for deployments whose pods ``cmd`` may destroy."""
    owners: list[str] = []
    if cmd.verb in _POD_TOUCHING_VERBS and cmd.name:
        owners.append(cmd.name)
    elif cmd.verb == "delete" and cmd.kind_base == "pod" and cmd.name:
        pod = state.pod(cmd.name)
        if pod is not None:
            owners.append(pod.owner_deployment)
    elif cmd.verb == "delete" and cmd.kind_base == "deployment" and cmd.name:
        owners.append(cmd.name)
    elif cmd.verb == "apply" and cmd.manifest and cmd.manifest.get("kind") == "Deployment":
        owners.append(cmd.manifest["metadata"]["name"])

    fragments = []
    for owner in owners:
        for ordinal, pod in enumerate(state.pods_of(owner)):
            fragments.append(PodFragment(owner, ordinal, pod.poisoned, pod.restarts))
    return tuple(fragments)


def make_entry(state: ClusterState, cmd: Command, inverse: Command | None) -> UndoEntry:
    """Build the stack entry for ``cmd`` against its pre-execution state."""
    return UndoEntry(cmd, inverse, pod_fragments_for(state, cmd))


def _restore_fragments(state: ClusterState, entry: UndoEntry) -> ClusterState:
    """Re-apply pod-pinned fault markers lost to recreation, if any."""
    if not entry.pod_fragments:
        return state
    out = state.clone()
    changed = False
    for frag in entry.pod_fragments:
        owned = out.pods_of(frag.owner)
        if frag.ordinal >= len(owned):
            continue
        pod = owned[frag.ordinal]
        if pod.poisoned != frag.poisoned or pod.restarts != frag.restarts:
            pod.poisoned = frag.poisoned
            pod.restarts = frag.restarts
            changed = True
    if not changed:
        return state
    logger.info("rollback used fragment restoration for %s", entry.original.text)
    return reconcile(out)


class UndoStack:
    """LIFO stack of undo entries with per-transaction segment marks."""

    def __init__(self) -> None:
        self._entries: list[UndoEntry] = []

    def __len__(self) -> int:
        return len(self._entries)

    def push(self, entry: UndoEntry) -> None:
        self._entries.append(entry)

    def open_segment(self) -> int:
        """Mark the current depth; the segment is everything pushed above it."""
        return len(self._entries)

    def truncate(self, mark: int) -> None:
        """Discard entries above the mark without executing them (crash restore)."""
        del self._entries[mark:]

    def peek_summaries(self) -> list[dict]:
        return [entry.summary() for entry in self._entries]

    def rollback_last(self, env_state: ClusterState) -> tuple[str, int, ClusterState]:
        """Undo the most recent action.

        Returns (message, remaining depth, new state). On an empty stack the
        state is untouched and the message says so, verbatim.
        """
        if not self._entries:
            return NO_MORE_ACTIONS, 0, env_state
        entry = self._entries.pop()
        state = env_state
        if entry.inverse is not None:
            try:
                state = cmdmod.apply_write(state, entry.inverse)
            except Exception as exc:
                raise InverseFailed(
                    f"inverse rejected for {entry.original.text!r}: {exc}"
                ) from exc
            if state.crashed:
                raise InverseFailed(f"inverse crashed the environment: {entry.inverse.text!r}")
        else:
            state = reconcile(state)
        state = _restore_fragments(state, entry)
        inverse_text = entry.inverse.text if entry.inverse else "no-op"
        message = (
            f"Rolled back the previous command: {entry.original.text}, "
            f"using rollback:{inverse_text}"
        )
        return message, len(self._entries), state

    def rollback_segment(self, env_state: ClusterState, mark: int) -> ClusterState:
        """Undo every entry above ``mark``, newest first."""
        if mark > len(self._entries):
            raise ValueError(f"segment mark {mark} beyond stack depth {len(self._entries)}")
        state = env_state
        while len(self._entries) > mark:
            _, _, state = self.rollback_last(state)
        return state


__all__ = [
    "InverseFailed",
    "NO_MORE_ACTIONS",
    "PodFragment",
    "UndoEntry",
    "UndoStack",
    "make_entry",
    "pod_fragments_for",
]
