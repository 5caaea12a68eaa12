import threading
import time

import numpy as np
import pytest

from afc.broker.client import BrokerClient
from afc.broker.server import BrokerServer
from afc.broker.wire import Frame, Opcode, decode_frame, encode_frame
from afc.errors import ConnectivityError


@pytest.fixture
def server():
    with BrokerServer(port=0, capacity_mb=16) as srv:
        yield srv


@pytest.fixture
def client(server):
    with BrokerClient(server.address) as c:
        yield c


def random_tensor(rng):
    dtype = rng.choice([np.float32, np.float64, np.int64])
    ndim = int(rng.integers(0, 4))
    dims = tuple(int(d) for d in rng.integers(0, 6, size=ndim))
    if dtype == np.int64:
        return rng.integers(-(2**40), 2**40, size=dims).astype("<i8")
    return rng.normal(size=dims).astype(np.dtype(dtype).newbyteorder("<"))


def test_frame_roundtrip_randomized(rng):
    for _ in range(2000):
        arr = random_tensor(rng)
        from afc.broker.wire import tensor_frame

        f = tensor_frame(Opcode.PUT, "some.key", arr)
        decoded, used = decode_frame(encode_frame(f))
        assert used == len(encode_frame(f))
        back = decoded.tensor()
        assert back.shape == arr.shape
        assert back.tobytes() == arr.tobytes()


def test_put_get_bit_exact(client, rng):
    for k in range(200):
        arr = random_tensor(rng)
        client.put_tensor(f"k{k}", arr)
        back = client.get_tensor(f"k{k}", 1000)
        assert back.tobytes() == arr.tobytes()
        assert back.shape == arr.shape and back.dtype == arr.dtype


def test_get_absent_times_out(client):
    t0 = time.monotonic()
    assert client.get_tensor("nope", 50) is None
    assert time.monotonic() - t0 >= 0.05


def test_ping(client):
    client.ping()


def test_delete_idempotent_prefix(client):
    client.put_tensor("ep1.env0.x", np.zeros(3))
    client.put_tensor("ep1.env1.y", np.zeros(3))
    client.put_tensor("ep2.z", np.ones(2))
    client.delete("ep1.")
    client.delete("ep1.")  # absent: still OK
    assert client.get_tensor("ep1.env0.x", 10) is None
    assert client.get_tensor("ep1.env1.y", 10) is None
    assert client.get_tensor("ep2.z", 10) is not None


def test_empty_tensor_legal(client):
    client.put_tensor("empty", np.zeros((0,)))
    back = client.get_tensor("empty", 100)
    assert back.shape == (0,)


def test_blocking_get_wakes_on_put(server):
    got = {}

    def reader():
        with BrokerClient(server.address) as c:
            got["v"] = c.get_tensor("late", 5000)

    t = threading.Thread(target=reader)
    t.start()
    time.sleep(0.1)
    with BrokerClient(server.address) as c:
        c.put_tensor("late", np.arange(4.0))
    t.join(timeout=5)
    assert not t.is_alive()
    np.testing.assert_array_equal(got["v"], np.arange(4.0))


def test_capacity_rejected_with_err(server):
    with BrokerClient(server.address) as c:
        big = np.zeros(3 * 1024 * 1024)  # 24 MB > 16 MB capacity
        with pytest.raises(ConnectivityError, match="capacity"):
            c.put_tensor("big", big)
        # the store still works afterwards
        c.put_tensor("small", np.zeros(4))
        assert c.get_tensor("small", 100) is not None


def test_last_write_wins_atomic(server):
    """Concurrent writers of one key: readers see one payload in full."""
    n_writers, n_ops = 8, 200
    payload_a = np.full(1024, 1.0)
    payload_b = np.full(1024, 2.0)

    def writer(which):
        with BrokerClient(server.address) as c:
            for _ in range(n_ops):
                c.put_tensor("contended", payload_a if which else payload_b)

    threads = [threading.Thread(target=writer, args=(i % 2,)) for i in range(n_writers)]
    for t in threads:
        t.start()
    seen_mixed = False
    with BrokerClient(server.address) as c:
        for _ in range(300):
            v = c.get_tensor("contended", 1000)
            if v is not None:
                u = np.unique(v)
                if u.size != 1:
                    seen_mixed = True
    for t in threads:
        t.join()
    assert not seen_mixed


def test_malformed_frame_answered_with_err_and_close(server):
    import socket

    host, port = server.address.rsplit(":", 1)
    with socket.create_connection((host, int(port))) as s:
        s.sendall(b"BOGUS!!!" + bytes(20))
        from afc.broker.wire import read_frame

        reply = read_frame(s)
        assert reply.opcode == Opcode.ERR
        # server closes after protocol violation (FIN or RST both count)
        try:
            assert s.recv(1) == b""
        except ConnectionResetError:
            pass


def test_stress_64_clients_no_lost_or_torn_reads(server):
    """Randomized stress: every blocking GET returns the value of some
    completed PUT for that key, never a mix."""
    n_clients = 64
    n_keys = 40
    ops_per_client = 160  # ~10k operations total
    errors = []

    def work(cid):
        try:
            rng = np.random.default_rng(cid)
            with BrokerClient(server.address) as c:
                for k in range(ops_per_client):
                    key = f"s{int(rng.integers(n_keys))}"
                    if rng.random() < 0.5:
                        val = float(rng.integers(1, 1000))
                        c.put_tensor(key, np.full(257, val))
                    else:
                        v = c.get_tensor(key, 2000)
                        if v is not None and np.unique(v).size != 1:
                            errors.append(f"torn read on {key}")
        except Exception as exc:  # noqa: BLE001
            errors.append(repr(exc))

    threads = [threading.Thread(target=work, args=(i,)) for i in range(n_clients)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=120)
    assert not errors, errors[:5]


def test_get_latency_after_put(server):
    with BrokerClient(server.address) as c:
        arr = np.zeros(255, dtype=np.float32)
        lat = []
        for _ in range(100):
            c.put_tensor("lat", arr)
            t0 = time.perf_counter()
            c.get_tensor("lat", 1000)
            lat.append(time.perf_counter() - t0)
        assert np.median(lat) <= 0.005
