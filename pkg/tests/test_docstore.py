import hashlib

import pytest

from carbonmarket.docstore import DocumentStore
from carbonmarket.errors import NotFound, TooLarge

ABC_HASH = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_store_abc_standard_vector(tmp_path):
    store = DocumentStore(tmp_path)
    record = store.put(b"abc")
    assert record.content_hash == ABC_HASH
    assert record.size_bytes == 3


def test_roundtrip_identity(tmp_path):
    store = DocumentStore(tmp_path)
    data = bytes(range(256)) * 100
    record = store.put(data)
    assert store.get(record.content_hash) == data
    assert record.content_hash == hashlib.sha256(data).hexdigest()


def test_fetch_unknown_hash(tmp_path):
    store = DocumentStore(tmp_path)
    with pytest.raises(NotFound):
        store.get("0" * 64)


def test_idempotent_put(tmp_path):
    store = DocumentStore(tmp_path)
    a = store.put(b"same bytes")
    b = store.put(b"same bytes")
    assert a.content_hash == b.content_hash
    assert store.get(a.content_hash) == b"same bytes"


def test_too_large(tmp_path):
    store = DocumentStore(tmp_path, max_bytes=10)
    with pytest.raises(TooLarge):
        store.put(b"x" * 11)
    store.put(b"x" * 10)


def test_fanout_layout(tmp_path):
    store = DocumentStore(tmp_path)
    record = store.put(b"abc")
    expected = tmp_path / ABC_HASH[:2] / ABC_HASH[2:4] / ABC_HASH
    assert expected.is_file()
    assert store.has(record.content_hash)


def test_corrupted_file_fails_hash_check(tmp_path):
    store = DocumentStore(tmp_path)
    record = store.put(b"abc")
    path = tmp_path / ABC_HASH[:2] / ABC_HASH[2:4] / ABC_HASH
    path.write_bytes(b"abd")
    with pytest.raises(NotFound):
        store.get(record.content_hash)
