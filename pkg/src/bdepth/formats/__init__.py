"""Input and output file formats."""

from bdepth.formats.complex_file import parse_complex, serialize_complex
from bdepth.formats.manifest import RunManifest

__all__ = ["RunManifest", "parse_complex", "serialize_complex"]
