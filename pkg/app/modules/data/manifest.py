import logging
from pathlib import Path
from typing import Iterable

from app.utils.errors import LoadError
from app.utils.helpers import PathLike, atomic_write_text
from .netpbm import read_pgm, read_ppm
from .schemas import ManifestEntry, Sample

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.tsv"


def resolve_manifest(path: PathLike) -> Path:
    """Accept either a manifest file or the dataset directory holding one."""
    path = Path(path)
    return path / MANIFEST_NAME if path.is_dir() else path


def write_manifest(path: PathLike, rows: Iterable[tuple[str, PathLike, PathLike]]) -> Path:
    """One ``id<TAB>image<TAB>labels`` line per sample, paths relative to the manifest."""
    lines = [f"{sample_id}\t{Path(image).as_posix()}\t{Path(labels).as_posix()}\n" for sample_id, image, labels in rows]
    return atomic_write_text(path, "".join(lines))


def read_manifest(path: PathLike) -> list[ManifestEntry]:
    path = resolve_manifest(path)
    if not path.is_file():
        raise LoadError(f"manifest {path} does not exist")
    root = path.parent
    entries = []
    text = path.read_bytes().decode("utf-8")
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        fields = line.rstrip("\r").split("\t")
        if len(fields) != 3:
            raise LoadError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}")
        sample_id, image, labels = fields
        image_path, label_path = root / image, root / labels
        for candidate in (image_path, label_path):
            if not candidate.is_file():
                raise LoadError(f"{path}:{lineno}: missing file {candidate}")
        entries.append(ManifestEntry(id=sample_id, image_path=image_path, label_path=label_path, line=lineno))
    return entries


def load_sample(entry: ManifestEntry) -> Sample:
    image = read_ppm(entry.image_path)
    labels = read_pgm(entry.label_path)
    if image.shape[1:] != labels.shape:
        raise LoadError(
            f"line {entry.line}: image {image.shape[1:]} and labels {labels.shape} disagree in size"
        )
    return Sample(image=image, labels=labels, id=entry.id)


def load_manifest(path: PathLike) -> list[Sample]:
    """Load every sample listed in the manifest, in file order."""
    samples = [load_sample(entry) for entry in read_manifest(path)]
    if not samples:
        logger.warning(f"Manifest {resolve_manifest(path)} lists no samples")
    return samples
