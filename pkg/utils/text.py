# utils/text.py
import re, unicodedata


def normalize(text: str) -> str:
    """ASCII, lower case, no accents; separators (space, '-', '_') dropped.

    Class names arrive as "BTR-60", "btr 60" or "BTR60" depending on who wrote
    the manifest; they all normalize to "btr60".
    """
    text = unicodedata.normalize("NFKD", str(text))
    text = text.encode("ascii", "ignore").decode("ascii")
    text = re.sub(r"[\s_\-]+", "", text)
    return text.strip().lower()


def safe_stem(name: str, default: str = "scene") -> str:
    """File-name safe identifier (letters, digits, '_', '-', '.')."""
    safe = "".join(c for c in str(name) if c.isalnum() or c in ("_", "-", ".")).strip(".")
    return safe or default
