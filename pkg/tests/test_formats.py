# -*- coding: utf 8 -*-
"""
Define a suite a tests for reading and writing files.
"""
import os

import numpy as np
import pytest

from baforge.errors import FormatError, ValidationError
from baforge.extractor import build_extractor
from baforge.formats import (read_ppm, write_ppm, save_extractor, load_extractor,
                             export_dataset, import_dataset, read_json, MAGIC)


def test_ppm(tmp_path, image):
    """
    Test images come back quantized to 8 bits.
    """
    path = str(tmp_path / 'x.ppm')
    write_ppm(path, image)
    with open(path, 'rb') as f:
        assert f.read(2) == b'P6'
    back = read_ppm(path)
    assert back.dtype == np.float32
    assert back.shape == image.shape
    assert np.max(np.abs(back - image)) <= 0.5 / 255 + 1e-6
    assert np.array_equal(np.round(back * 255), np.round(np.clip(image, 0, 1) * 255))


def test_ppm_ascii(tmp_path):
    """
    Test P3 with a comment.
    """
    path = tmp_path / 'a.ppm'
    path.write_text('P3\n# two pixels\n2 1\n255\n0 0 0  255 128 255\n')
    image = read_ppm(str(path))
    assert image.shape == (1, 2, 3)
    assert np.allclose(image[0, 1], [1, 128 / 255, 1])


def test_ppm_errors(tmp_path, image):
    """
    Test bad magic and truncation.
    """
    path = tmp_path / 'bad.ppm'
    path.write_bytes(b'P5\n2 2\n255\n' + bytes(4))
    with pytest.raises(FormatError):
        read_ppm(str(path))

    good = str(tmp_path / 'good.ppm')
    write_ppm(good, image)
    with open(good, 'rb') as f:
        data = f.read()
    path.write_bytes(data[:-10])
    with pytest.raises(FormatError):
        read_ppm(str(path))


def test_weights_roundtrip(tmp_path, extractor, image):
    """
    Test embeddings are bit-identical after saving and loading.
    """
    path = str(tmp_path / 'model.baf')
    save_extractor(extractor, path)
    with open(path, 'rb') as f:
        assert f.read(4) == MAGIC
    loaded = load_extractor(path)
    assert loaded.descriptor() == extractor.descriptor()
    assert np.array_equal(loaded.forward(image), extractor.forward(image))


def test_weights_seeds(tmp_path):
    """
    Test different seeds give different files.
    """
    a, b = str(tmp_path / 'a.baf'), str(tmp_path / 'b.baf')
    save_extractor(build_extractor(seed=0, input_shape=(16, 16, 3)), a)
    save_extractor(build_extractor(seed=1, input_shape=(16, 16, 3)), b)
    with open(a, 'rb') as fa, open(b, 'rb') as fb:
        assert fa.read() != fb.read()


def test_weights_errors(tmp_path, extractor):
    """
    Test truncated files and bad magic give format errors.
    """
    path = str(tmp_path / 'model.baf')
    save_extractor(extractor, path)
    with open(path, 'rb') as f:
        data = f.read()

    bad = tmp_path / 'bad.baf'
    for broken in (data[:3], data[:20], data[:-4], data + b'\x00'):
        bad.write_bytes(broken)
        with pytest.raises(FormatError):
            load_extractor(str(bad))

    bad.write_bytes(b'XXXX' + data[4:])
    with pytest.raises(FormatError) as e:
        load_extractor(str(bad))
    assert 'BAF1' in str(e.value)

    bad.write_bytes(data[:4] + b'\x09\x00' + data[6:])
    with pytest.raises(FormatError):
        load_extractor(str(bad))


def test_dataset_export(tmp_path, dataset):
    """
    Test exported datasets read back with their labels.
    """
    out = str(tmp_path / 'data')
    table = export_dataset(dataset, out)
    assert len(table) == len(dataset)
    assert os.path.exists(os.path.join(out, 'id0_0.ppm'))
    assert os.path.exists(os.path.join(out, 'id3_5.ppm'))
    back = import_dataset(out)
    assert np.array_equal(back.labels, dataset.labels)
    assert np.max(np.abs(back.images - dataset.images)) <= 0.5 / 255 + 1e-6


def test_read_json(tmp_path):
    """
    Test JSON from text and file, and parse errors with line context.
    """
    assert read_json('{"a": 1}') == {'a': 1}
    path = tmp_path / 'c.json'
    path.write_text('{\n  "a": 1,\n  "b": oops\n}\n')
    with pytest.raises(ValidationError) as e:
        read_json(str(path))
    assert 'line 3' in str(e.value)
