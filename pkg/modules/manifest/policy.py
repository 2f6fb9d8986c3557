from __future__ import annotations

from dataclasses import dataclass
from typing import Any, List

from modules.logger import mask_token
from modules.manifest.models import ManifestData, ManifestFieldPolicy

_SECRET_FIELDS = {"auth.verification_tokens"}


@dataclass(frozen=True)
class PolicyViolation:
    field: str
    preview: str


def _lookup(fields: dict, dotted: str) -> Any:
    node: Any = fields
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            return None
        node = node[part]
    return node


def _populated(dotted: str, value: Any) -> bool:
    if value is None or value == "" or value == {} or value == []:
        return False
    # {"type": "none"} is the platform default, not a configured setting
    if dotted == "auth" and isinstance(value, dict):
        return any(k != "type" for k in value) or value.get("type", "none") != "none"
    return True


def _preview(dotted: str, value: Any) -> str:
    if dotted in _SECRET_FIELDS:
        if isinstance(value, dict):
            return ", ".join(f"{k}={mask_token(str(v))}" for k, v in sorted(value.items(), key=lambda kv: str(kv[0])))
        return mask_token(str(value))
    if isinstance(value, dict):
        value = {
            k: _preview(f"{dotted}.{k}", v) if f"{dotted}.{k}" in _SECRET_FIELDS else v
            for k, v in value.items()
        }
    text = value if isinstance(value, str) else repr(value)
    return text if len(text) <= 80 else text[:77] + "..."


def check_field_policy(manifest: ManifestData, policy: ManifestFieldPolicy) -> List[PolicyViolation]:
    """Hidden fields that the manifest actually populates, i.e. what a leaked manifest reveals."""
    violations = []
    for dotted in sorted(policy.hidden):
        value = _lookup(manifest.raw_fields, dotted)
        if _populated(dotted, value):
            violations.append(PolicyViolation(field=dotted, preview=_preview(dotted, value)))
    return violations
