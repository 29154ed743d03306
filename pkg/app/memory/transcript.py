import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from ..core.config import settings
from ..models.schemas import Actor, TranscriptEvent

logger = logging.getLogger(__name__)


class Transcript:
    """Ordered event log of one protocol session"""

    def __init__(self, session_id: str = "session"):
        self.session_id = session_id
        self.events: List[TranscriptEvent] = []

    def add_event(
        self, step: int, actor: Actor, action: str, **payload: Any
    ) -> TranscriptEvent:
        """Append an event and return it"""
        event = TranscriptEvent(step=step, actor=actor, action=action, payload=payload)
        self.events.append(event)
        return event

    def get_recent_events(self, limit: int = 10) -> List[TranscriptEvent]:
        return self.events[-limit:]

    def by_actor(self, actor: Actor) -> List[TranscriptEvent]:
        return [event for event in self.events if event.actor == actor]

    def by_step(self, step: int) -> List[TranscriptEvent]:
        return [event for event in self.events if event.step == step]

    def __len__(self) -> int:
        return len(self.events)


class TranscriptStore:
    """Persists transcripts as JSON files, one per session id"""

    def __init__(self, storage_path: Optional[str] = None):
        self.storage_path = Path(storage_path or settings.transcript_dir)
        self.storage_path.mkdir(parents=True, exist_ok=True)
        self.transcripts: Dict[str, List[TranscriptEvent]] = {}
        self._load_transcripts()

    def save(self, session_id: str, events: List[TranscriptEvent]) -> Path:
        """Store a transcript and write it to disk"""
        self.transcripts[session_id] = list(events)
        transcript_file = self.storage_path / f"{session_id}.json"
        payload = {
            "session_id": session_id,
            "events": [event.model_dump(mode="json") for event in events],
        }
        transcript_file.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        logger.debug(f"Saved transcript {session_id} ({len(events)} events)")
        return transcript_file

    def get(self, session_id: str) -> Optional[List[TranscriptEvent]]:
        return self.transcripts.get(session_id)

    def delete(self, session_id: str) -> bool:
        if session_id not in self.transcripts:
            return False
        del self.transcripts[session_id]
        transcript_file = self.storage_path / f"{session_id}.json"
        if transcript_file.exists():
            transcript_file.unlink()
        return True

    def list_sessions(self) -> List[str]:
        return sorted(self.transcripts)

    def _load_transcripts(self):
        """Load transcripts from disk"""
        for file_path in sorted(self.storage_path.glob("*.json")):
            try:
                data = json.loads(file_path.read_text(encoding="utf-8"))
                self.transcripts[data["session_id"]] = [
                    TranscriptEvent.model_validate(event) for event in data["events"]
                ]
            except (OSError, KeyError, ValueError, ValidationError) as e:
                logger.error(f"Error loading transcript from {file_path}: {e}")
