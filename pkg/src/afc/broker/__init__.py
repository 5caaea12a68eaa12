"""In-memory key-to-tensor store over TCP with blocking reads."""

from afc.broker.client import BrokerClient
from afc.broker.server import BrokerServer
from afc.broker.wire import Frame, Opcode, decode_frame, encode_frame, read_frame

__all__ = [
    "BrokerClient",
    "BrokerServer",
    "Frame",
    "Opcode",
    "encode_frame",
    "decode_frame",
    "read_frame",
]
