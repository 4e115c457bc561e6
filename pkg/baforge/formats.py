"""
Module for reading and writing baforge files.

- Images: binary PPM (P6, 8-bit). ASCII PPM (P3) is also read.
- Weights: the versioned little-endian "BAF1" format.
- Datasets: a directory of `id<label>_<index>.ppm` images plus `labels.csv`.
- Configs: JSON documents.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import json
import os
import re
import struct

import numpy as np
import pandas as pd

from .errors import FormatError, ValidationError, ShapeError

MAGIC = b'BAF1'
VERSION = 1
_HEADER = struct.Struct('<4sHI')

_PPM_TOKEN = re.compile(rb'\s*(?:#[^\n]*\n\s*)*(\S+)')


###############################################
# Images
###############################################

def write_ppm(path, image):
    """
    Write an image in [0, 1] as an 8-bit binary PPM.

    Values are clipped and rounded to the nearest of 256 levels.

    Args:
        path (str): Where to write.
        image (ndarray): (H, W, 3), or (H, W, 1) / (H, W) for grey.
    """
    image = np.asarray(image)
    if image.ndim == 2:
        image = image[..., None]
    if image.ndim != 3 or image.shape[-1] not in (1, 3):
        raise ShapeError("PPM needs an (H, W, 3) image, got shape {}.".format(image.shape))
    if image.shape[-1] == 1:
        image = np.repeat(image, 3, axis=-1)

    data = np.round(np.clip(image, 0, 1) * 255).astype(np.uint8)
    h, w, _ = data.shape
    with open(path, 'wb') as f:
        f.write('P6\n{} {}\n255\n'.format(w, h).encode('ascii'))
        f.write(data.tobytes())


def read_ppm(path):
    """
    Read a PPM (P6 or P3) into a float32 (H, W, 3) array in [0, 1].

    Args:
        path (str): The file.

    Returns:
        ndarray.
    """
    with open(path, 'rb') as f:
        raw = f.read()

    tokens, pos = [], 0
    for _ in range(4):
        match = _PPM_TOKEN.match(raw, pos)
        if match is None:
            raise FormatError("{} ends inside the PPM header.".format(path))
        tokens.append(match.group(1))
        pos = match.end()

    magic = tokens[0]
    if magic not in (b'P6', b'P3'):
        raise FormatError("{} is not a PPM file (magic {!r}, expected b'P6' or b'P3').".format(path, magic))
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError("{} has a malformed PPM header.".format(path))
    if not 0 < maxval < 256:
        raise FormatError("{}: only 8-bit PPM is supported, maxval is {}.".format(path, maxval))

    n = w * h * 3
    if magic == b'P6':
        body = raw[pos + 1:pos + 1 + n]
        if len(body) != n:
            raise FormatError("{} is truncated: expected {} bytes of pixels, found {}.".format(path, n, len(body)))
        data = np.frombuffer(body, dtype=np.uint8)
    else:
        data = np.array([int(t) for t in raw[pos:].split()], dtype=np.int64)
        if data.size != n:
            raise FormatError("{} is truncated: expected {} values, found {}.".format(path, n, data.size))

    return (data.reshape(h, w, 3) / maxval).astype(np.float32)


###############################################
# Weights
###############################################

def save_extractor(extractor, path):
    """
    Write an extractor in the BAF1 format.

    Layout, little-endian: magic b'BAF1', uint16 version, uint32 length of
    the architecture descriptor, the descriptor as UTF-8 JSON, then every
    parameter tensor as raw float32 in declaration order.

    Args:
        extractor (FeatureExtractor): The model.
        path (str): Where to write.
    """
    descriptor = json.dumps(extractor.descriptor(), sort_keys=True).encode('utf-8')
    with open(path, 'wb') as f:
        f.write(_HEADER.pack(MAGIC, VERSION, len(descriptor)))
        f.write(descriptor)
        for p in extractor.params:
            f.write(np.ascontiguousarray(p, dtype='<f4').tobytes())


def load_extractor(path):
    """
    Read an extractor written by `save_extractor`.

    Args:
        path (str): The weights file.

    Returns:
        FeatureExtractor. With float32 parameters.
    """
    from .extractor import FeatureExtractor

    with open(path, 'rb') as f:
        raw = f.read()

    if len(raw) < _HEADER.size:
        raise FormatError("{} is truncated: no complete BAF1 header.".format(path))
    magic, version, n = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError("{} has magic bytes {!r}, expected {!r}.".format(path, magic, MAGIC))
    if version != VERSION:
        raise FormatError("{} is BAF1 version {}; this reader knows version {}.".format(path, version, VERSION))

    pos = _HEADER.size
    if len(raw) < pos + n:
        raise FormatError("{} is truncated inside the architecture descriptor.".format(path))
    try:
        descriptor = json.loads(raw[pos:pos + n].decode('utf-8'))
        skeleton = FeatureExtractor.from_descriptor(descriptor)
    except (ValueError, KeyError, TypeError) as e:
        raise FormatError("{} has a bad architecture descriptor: {}".format(path, e))
    pos += n

    params = []
    for shape in skeleton.parameter_shapes():
        size = int(np.prod(shape)) * 4
        chunk = raw[pos:pos + size]
        if len(chunk) != size:
            raise FormatError("{} is truncated: parameter data ends early.".format(path))
        params.append(np.frombuffer(chunk, dtype='<f4').astype(np.float32).reshape(shape))
        pos += size

    if pos != len(raw):
        raise FormatError("{} has {} unexpected trailing bytes.".format(path, len(raw) - pos))

    return skeleton.with_params(params)


###############################################
# Datasets
###############################################

def export_dataset(dataset, directory):
    """
    Write a dataset as PPM images plus a labels table.

    Files are named `id<label>_<index>.ppm`, where index counts the samples
    of each identity. `labels.csv` lists file, label and index.

    Args:
        dataset (baforge.synthetic.Dataset): The images and labels.
        directory (str): Output directory, created if needed.

    Returns:
        pd.DataFrame. The labels table.
    """
    os.makedirs(directory, exist_ok=True)
    rows, counts = [], {}
    for image, label in zip(dataset.images, dataset.labels):
        label = int(label)
        index = counts.get(label, 0)
        counts[label] = index + 1
        name = 'id{}_{}.ppm'.format(label, index)
        write_ppm(os.path.join(directory, name), image)
        rows.append({'file': name, 'label': label, 'index': index})

    table = pd.DataFrame(rows, columns=['file', 'label', 'index'])
    table.to_csv(os.path.join(directory, 'labels.csv'), index=False)
    return table


def import_dataset(directory):
    """
    Read a dataset written by `export_dataset`.

    Returns:
        baforge.synthetic.Dataset.
    """
    from .synthetic import Dataset

    path = os.path.join(directory, 'labels.csv')
    if not os.path.exists(path):
        raise FileNotFoundError("No labels.csv in {}.".format(directory))
    table = pd.read_csv(path)
    images = np.stack([read_ppm(os.path.join(directory, f)) for f in table['file']])
    return Dataset(images, table['label'].to_numpy(dtype=np.int64))


###############################################
# Configs
###############################################

def read_json(source):
    """
    Parse a JSON document from a path or a string.

    Parse errors become ValidationErrors naming the line and column.

    Args:
        source (str): A file path, or the JSON text itself.

    Returns:
        The parsed object.
    """
    if isinstance(source, dict):
        return source
    name = '<string>'
    if os.path.exists(str(source)):
        name = source
        with open(source, 'r') as f:
            source = f.read()
    try:
        return json.loads(source)
    except json.JSONDecodeError as e:
        line = source.splitlines()[e.lineno - 1] if source.splitlines() else ''
        m = "{}: line {}, column {}: {}\n    {}".format(name, e.lineno, e.colno, e.msg, line)
        raise ValidationError(m)


def dump_json(obj):
    """
    An object as indented JSON text with sorted keys. NumPy scalars, arrays
    and tuples become plain numbers and lists.
    """
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)


def write_json(path, obj):
    """
    Write `dump_json(obj)` to a file.
    """
    with open(path, 'w') as f:
        f.write(dump_json(obj) + '\n')


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError("Object of type {} is not JSON serializable.".format(type(obj).__name__))
