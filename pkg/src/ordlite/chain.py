"""Blocks, transactions, the UTXO set, fees and the supply schedule.

The ledger is a linear chain of JSONL-encoded blocks applied to a UTXO set.
Sat-range bookkeeping lives in :mod:`ordlite.ordinals`; entries here just
carry the ranges alongside each unspent output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import errors

COIN = 100_000_000
INITIAL_SUBSIDY = 50 * COIN
HALVING_INTERVAL = 210_000
DIFFICULTY_PERIOD = 2_016
# Halving epochs and difficulty periods realign every lcm(2016, 210000) blocks.
CYCLE_BLOCKS = 1_260_000
SUBSIDY_EPOCHS = 33  # 50e8 >> 33 == 0

SCRIPT_KINDS = ("plain", "p2tr_inscription")


@dataclass(frozen=True, order=True)
class OutPoint:
    txid: str
    vout: int

    def __post_init__(self):
        if len(self.txid) != 64 or any(c not in "0123456789abcdef" for c in self.txid):
            raise ValueError(f"bad txid {self.txid!r}")

    def __str__(self):
        return f"{self.txid}:{self.vout}"

    @classmethod
    def parse(cls, s: str) -> "OutPoint":
        txid, _, vout = s.rpartition(":")
        return cls(txid, int(vout))


@dataclass(frozen=True)
class TxOut:
    value: int
    recipient: str
    script_kind: str = "plain"

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("negative output value")
        if self.script_kind not in SCRIPT_KINDS:
            raise ValueError(f"unknown script kind {self.script_kind!r}")


@dataclass(frozen=True)
class TxIn:
    prevout: OutPoint
    witness: tuple = ()  # tuple of bytes


@dataclass(frozen=True)
class Transaction:
    txid: str
    inputs: tuple
    outputs: tuple
    is_coinbase: bool = False

    def output_total(self) -> int:
        return sum(o.value for o in self.outputs)


@dataclass(frozen=True)
class Block:
    height: int
    txs: tuple


@dataclass
class UtxoEntry:
    txout: TxOut
    sat_ranges: list = field(default_factory=list)  # list of (start, end) half-open


class UtxoSet:
    """Map OutPoint -> UtxoEntry. Mutated only by validate_and_apply_block."""

    def __init__(self):
        self.entries: dict[OutPoint, UtxoEntry] = {}

    def __contains__(self, outpoint):
        return outpoint in self.entries

    def __len__(self):
        return len(self.entries)

    def get(self, outpoint) -> UtxoEntry | None:
        return self.entries.get(outpoint)

    def require(self, outpoint) -> UtxoEntry:
        entry = self.entries.get(outpoint)
        if entry is None:
            raise errors.MissingPrevout(str(outpoint))
        return entry

    def total_value(self) -> int:
        return sum(e.txout.value for e in self.entries.values())


def block_subsidy(height: int, *, initial=INITIAL_SUBSIDY, interval=HALVING_INTERVAL) -> int:
    if height < 0:
        raise ValueError("negative height")
    epoch = height // interval
    if epoch >= SUBSIDY_EPOCHS:
        return 0
    return initial >> epoch


def resolve_input_total(tx: Transaction, utxos: UtxoSet) -> int:
    return sum(utxos.require(tin.prevout).txout.value for tin in tx.inputs)


def tx_fee(tx: Transaction, utxos: UtxoSet) -> int:
    if tx.is_coinbase:
        raise ValueError("coinbase has no fee")
    fee = resolve_input_total(tx, utxos) - tx.output_total()
    if fee < 0:
        raise errors.NegativeFee(f"{tx.txid}: inputs short by {-fee} sats")
    return fee


def tx_body_size(tx: Transaction) -> int:
    """Byte length of the canonical JSON serialization, witness arrays excluded."""
    return len(canonical_dumps(tx_to_json(tx, include_witness=False)).encode())


def tx_witness_size(tx: Transaction) -> int:
    return sum(len(item) for tin in tx.inputs for item in tin.witness)


def tx_vsize(tx: Transaction) -> int:
    wsize = tx_witness_size(tx)
    return tx_body_size(tx) + (wsize + 3) // 4


def fee_rate(tx: Transaction, utxos: UtxoSet) -> Fraction:
    return Fraction(tx_fee(tx, utxos), tx_vsize(tx))


@dataclass
class BlockReport:
    height: int
    fees: dict  # txid -> fee
    spent: list  # OutPoints removed
    created: list  # OutPoints inserted

    @property
    def total_fees(self) -> int:
        return sum(self.fees.values())


def validate_block(block: Block, utxos: UtxoSet, next_height: int,
                   *, subsidy=None) -> BlockReport:
    """Check a block against the UTXO set without mutating anything.

    Within-block chaining is allowed: a tx may spend outputs created earlier
    in the same block.
    """
    if block.height != next_height:
        raise errors.NonMonotonicHeight(
            f"got height {block.height}, expected {next_height}")
    if not block.txs or not block.txs[0].is_coinbase:
        raise errors.ChainError("block must start with a coinbase")
    if any(tx.is_coinbase for tx in block.txs[1:]):
        raise errors.ChainError("only the first tx may be coinbase")

    spent: set[OutPoint] = set()
    created: dict[OutPoint, TxOut] = {}
    fees = {}
    for tx in block.txs[1:]:
        in_total = 0
        for tin in tx.inputs:
            op = tin.prevout
            if op in spent:
                raise errors.DoubleSpend(str(op))
            if op in created:
                in_total += created[op].value
            else:
                in_total += utxos.require(op).txout.value
            spent.add(op)
        out_total = tx.output_total()
        if in_total < out_total:
            raise errors.NegativeFee(f"{tx.txid}: inputs short by {out_total - in_total} sats")
        fees[tx.txid] = in_total - out_total
        for i, txout in enumerate(tx.outputs):
            created[OutPoint(tx.txid, i)] = txout

    if subsidy is None:
        subsidy = block_subsidy(block.height)
    coinbase = block.txs[0]
    budget = subsidy + sum(fees.values())
    if coinbase.output_total() > budget:
        raise errors.CoinbaseOverpay(
            f"coinbase claims {coinbase.output_total()}, budget {budget}")
    return BlockReport(block.height, fees, sorted(spent), sorted(created))


def apply_block(block: Block, utxos: UtxoSet, next_height: int,
                *, subsidy=None) -> BlockReport:
    """Validate then commit a block. On any error the UtxoSet is unchanged."""
    report = validate_block(block, utxos, next_height, subsidy=subsidy)
    for tx in block.txs:
        for tin in tx.inputs:
            utxos.entries.pop(tin.prevout, None)
        for i, txout in enumerate(tx.outputs):
            utxos.entries[OutPoint(tx.txid, i)] = UtxoEntry(txout)
    return report


# --- JSONL codec ---

def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def tx_to_json(tx: Transaction, include_witness=True) -> dict:
    obj = {
        "txid": tx.txid,
        "coinbase": tx.is_coinbase,
        "inputs": [
            {"txid": tin.prevout.txid, "vout": tin.prevout.vout}
            for tin in tx.inputs
        ],
        "outputs": [
            {"value": o.value, "recipient": o.recipient, "script_kind": o.script_kind}
            for o in tx.outputs
        ],
    }
    if include_witness:
        for tin, entry in zip(tx.inputs, obj["inputs"]):
            entry["witness"] = [item.hex() for item in tin.witness]
    return obj


def tx_from_json(obj: dict) -> Transaction:
    inputs = tuple(
        TxIn(OutPoint(i["txid"], i["vout"]),
             tuple(bytes.fromhex(w) for w in i.get("witness", [])))
        for i in obj.get("inputs", [])
    )
    outputs = tuple(
        TxOut(o["value"], o["recipient"], o.get("script_kind", "plain"))
        for o in obj["outputs"]
    )
    return Transaction(obj["txid"], inputs, outputs, bool(obj.get("coinbase")))


def block_to_json(block: Block) -> dict:
    return {"height": block.height, "txs": [tx_to_json(tx) for tx in block.txs]}


def block_from_json(obj: dict) -> Block:
    return Block(obj["height"], tuple(tx_from_json(t) for t in obj["txs"]))


def write_blocks_jsonl(blocks, fp) -> None:
    for block in blocks:
        fp.write(canonical_dumps(block_to_json(block)) + "\n")


def read_blocks_jsonl(fp):
    for line in fp:
        line = line.strip()
        if line:
            yield block_from_json(json.loads(line))
