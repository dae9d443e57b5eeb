"""The indexing pipeline and persistent snapshot.

For each block: validate and apply to the UTXO set, assign sat ranges (FIFO),
extract inscriptions from witnesses, replay BRC-20 operations, and settle
pending transfers whose inscribed sat moved. Protocol-level failures are
recorded as diagnostics and never abort indexing; chain-level failures abort
with the offending height and leave the state untouched.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from . import brc20, chain, envelope, errors, ordinals
from .chain import OutPoint
from .ordinals import SatPoint

BRC20_KINDS = {
    brc20.DEPLOY: "brc20_deploy",
    brc20.MINT: "brc20_mint",
    brc20.TRANSFER: "brc20_transfer",
}


def classify_envelope(env: envelope.Envelope) -> str:
    try:
        op = brc20.parse_brc20(env.body)
        return BRC20_KINDS[op.op]
    except errors.Brc20Error:
        pass
    if env.content_type.startswith("text/"):
        return "text"
    if env.content_type:
        return "file"
    return "other"


@dataclass
class Inscription:
    id: str  # "<txid>i<k>", k = envelope index within the tx
    number: int  # chain-wide sequential
    content_type: str
    body: bytes
    kind: str
    genesis_sat: int
    genesis_satpoint: SatPoint
    height: int


@dataclass
class Offer:
    id: str
    seller: str
    inscription_id: str
    ask: int
    psbt: "object"  # trade.Psbt; typed loosely to avoid a module cycle
    status: str  # open | accepted | settled | cancelled | stale


class IndexState:
    """Everything the indexer knows: chain tip, UTXOs with sat ranges,
    inscriptions, BRC-20 ledger, offer book and trade-level BTC deltas."""

    def __init__(self):
        self.tip_height = -1
        self.utxos = chain.UtxoSet()
        self.inscriptions: dict[str, Inscription] = {}
        self.location: dict[str, SatPoint] = {}  # inscription id -> current satpoint
        self.next_number = 0
        self.ledger = brc20.Brc20Ledger()
        self.offers: dict[str, Offer] = {}
        self.btc_deltas: dict[str, int] = {}  # trade settlement accounting
        self.diagnostics: list[str] = []

    # --- block pipeline ---

    def apply_block(self, block: chain.Block) -> None:
        report = chain.validate_block(block, self.utxos, self.tip_height + 1)
        assigned, burned = ordinals.assign_ordinals(block, self.utxos)

        # commit chain state
        for tx in block.txs:
            for tin in tx.inputs:
                self.utxos.entries.pop(tin.prevout, None)
            for i, txout in enumerate(tx.outputs):
                op = OutPoint(tx.txid, i)
                if op in assigned:
                    self.utxos.entries[op] = chain.UtxoEntry(txout, assigned[op])
        self.tip_height = block.height
        if burned:
            self.diagnostics.append(
                f"height {block.height}: {ordinals.range_total(burned)} sats burned "
                f"(coinbase underclaim)")

        # per tx, in order: settle moved inscriptions, then process reveals
        for tx in block.txs:
            if not tx.is_coinbase:
                self._track_moved_inscriptions(tx, block)
            self._extract_reveals(tx, block, assigned)

        self.ledger.check_invariants()

    def _recipient_of(self, satpoint: SatPoint) -> str:
        return self.utxos.require(satpoint.outpoint).txout.recipient

    def _relocate(self, inscription_id: str) -> SatPoint | None:
        sat = self.inscriptions[inscription_id].genesis_sat
        try:
            return ordinals.locate_sat(sat, self.utxos)
        except errors.SatNotInUtxoSet:
            return None

    def _track_moved_inscriptions(self, tx: chain.Transaction, block: chain.Block) -> None:
        spent = {tin.prevout for tin in tx.inputs}
        for ins_id, satpoint in list(self.location.items()):
            if satpoint.outpoint not in spent:
                continue
            new_point = self._relocate(ins_id)
            pending = self.ledger.pendings.get(ins_id)
            if new_point is None:
                self.location.pop(ins_id, None)
                self.diagnostics.append(f"inscription {ins_id} lost (sat burned)")
                if pending is not None and not pending.used:
                    self.ledger.cancel_pending(ins_id, "inscribed sat burned")
                continue
            self.location[ins_id] = new_point
            if pending is None or pending.used:
                continue
            receiver = self._recipient_of(new_point)
            if new_point.outpoint.txid == block.txs[0].txid:
                self.diagnostics.append(
                    f"pending {ins_id} spent to fee; settled to sat holder {receiver}")
            try:
                self.ledger.settle_transfer(ins_id, pending.owner, receiver)
            except errors.Brc20Error as exc:
                self.diagnostics.append(f"settle {ins_id}: {exc}")

    def _extract_reveals(self, tx: chain.Transaction, block: chain.Block,
                         assigned: dict) -> None:
        if not tx.outputs:
            return
        k = 0
        for tin in tx.inputs:
            try:
                env = envelope.parse_envelope(tin.witness)
            except errors.EnvelopeError as exc:
                self.diagnostics.append(
                    f"height {block.height} tx {tx.txid}: malformed envelope ({exc})")
                continue
            if env is None:
                continue
            ins_id = f"{tx.txid}i{k}"
            k += 1
            first_out = OutPoint(tx.txid, 0)
            ranges = assigned.get(first_out)
            if not ranges:
                self.diagnostics.append(
                    f"inscription {ins_id} bound to a zero-sat output; skipped")
                continue
            genesis_sat = ranges[0][0]
            satpoint = SatPoint(first_out, 0)
            kind = classify_envelope(env)
            ins = Inscription(ins_id, self.next_number, env.content_type,
                              env.body, kind, genesis_sat, satpoint, block.height)
            self.next_number += 1
            self.inscriptions[ins_id] = ins
            self.location[ins_id] = satpoint
            if kind in BRC20_KINDS.values():
                self._apply_brc20(ins, tx)

    def _apply_brc20(self, ins: Inscription, tx: chain.Transaction) -> None:
        op = brc20.parse_brc20(ins.body)
        actor = tx.outputs[0].recipient  # owner of the freshly inscribed sat
        try:
            if op.op == brc20.DEPLOY:
                self.ledger.apply_deploy(op, ins.id, ins.height)
            elif op.op == brc20.MINT:
                self.ledger.apply_mint(op, actor)
            else:
                self.ledger.inscribe_transfer(op, ins.id, actor)
        except errors.Brc20Error as exc:
            self.ledger.diagnostics.append(
                f"{ins.id} {op.op} {op.tick}: {type(exc).__name__}: {exc}")

    def index_blocks(self, blocks) -> None:
        for block in blocks:
            self.apply_block(block)

    # --- queries ---

    def sat_report(self, n: int) -> dict:
        info = ordinals.sat_info(n)
        try:
            info["satpoint"] = str(ordinals.locate_sat(n, self.utxos))
        except errors.SatNotInUtxoSet:
            pass
        return info

    def btc_balance(self, addr: str) -> int:
        """On-chain holdings: sum of unspent outputs paying the address."""
        return sum(e.txout.value for e in self.utxos.entries.values()
                   if e.txout.recipient == addr)

    # --- canonical snapshot ---

    def to_json(self) -> dict:
        return {
            "tip_height": self.tip_height,
            "next_number": self.next_number,
            "utxos": {
                str(op): {
                    "value": e.txout.value,
                    "recipient": e.txout.recipient,
                    "script_kind": e.txout.script_kind,
                    "sat_ranges": [list(r) for r in e.sat_ranges],
                }
                for op, e in sorted(self.utxos.entries.items())
            },
            "inscriptions": {
                ins.id: {
                    "number": ins.number,
                    "content_type": ins.content_type,
                    "body": ins.body.hex(),
                    "kind": ins.kind,
                    "genesis_sat": ins.genesis_sat,
                    "genesis_satpoint": str(ins.genesis_satpoint),
                    "satpoint": str(self.location[ins.id]) if ins.id in self.location else None,
                    "height": ins.height,
                }
                for ins in sorted(self.inscriptions.values(), key=lambda i: i.number)
            },
            "brc20": self.ledger.to_json(),
            "offers": {
                o.id: {
                    "seller": o.seller,
                    "inscription_id": o.inscription_id,
                    "ask": o.ask,
                    "psbt": o.psbt.to_json(),
                    "status": o.status,
                }
                for o in sorted(self.offers.values(), key=lambda o: o.id)
            },
            "btc_deltas": dict(sorted(self.btc_deltas.items())),
        }

    def snapshot_bytes(self) -> bytes:
        return chain.canonical_dumps(self.to_json()).encode()

    def snapshot_hash(self) -> str:
        return hashlib.sha256(self.snapshot_bytes()).hexdigest()

    @classmethod
    def from_json(cls, obj: dict) -> "IndexState":
        from . import trade  # deferred: trade imports this module

        state = cls()
        state.tip_height = obj["tip_height"]
        state.next_number = obj["next_number"]
        for key, e in obj["utxos"].items():
            op = OutPoint.parse(key)
            state.utxos.entries[op] = chain.UtxoEntry(
                chain.TxOut(e["value"], e["recipient"], e["script_kind"]),
                [tuple(r) for r in e["sat_ranges"]])
        for ins_id, i in obj["inscriptions"].items():
            gsp = i["genesis_satpoint"]
            outpoint, _, off = gsp.rpartition(":")
            ins = Inscription(ins_id, i["number"], i["content_type"],
                              bytes.fromhex(i["body"]), i["kind"],
                              i["genesis_sat"],
                              SatPoint(OutPoint.parse(outpoint), int(off)),
                              i["height"])
            state.inscriptions[ins_id] = ins
            if i.get("satpoint"):
                sp = i["satpoint"]
                outpoint, _, off = sp.rpartition(":")
                state.location[ins_id] = SatPoint(OutPoint.parse(outpoint), int(off))
        state.ledger = brc20.Brc20Ledger.from_json(obj["brc20"])
        for oid, o in obj.get("offers", {}).items():
            state.offers[oid] = Offer(oid, o["seller"], o["inscription_id"],
                                      o["ask"], trade.Psbt.from_json(o["psbt"]),
                                      o["status"])
        state.btc_deltas = dict(obj.get("btc_deltas", {}))
        return state

    @classmethod
    def load(cls, path) -> "IndexState":
        with open(path) as fp:
            return cls.from_json(json.load(fp))

    def save(self, path) -> None:
        with open(path, "w") as fp:
            fp.write(chain.canonical_dumps(self.to_json()))
