import copy
from fractions import Fraction

import pytest

from conftest import coinbase, spend, txid
from ordlite import chain, errors
from ordlite.chain import Block, OutPoint, Transaction, TxIn, TxOut, UtxoSet


def test_subsidy_schedule():
    assert chain.block_subsidy(0) == 5_000_000_000
    assert chain.block_subsidy(209_999) == 5_000_000_000
    assert chain.block_subsidy(210_000) == 2_500_000_000
    assert chain.block_subsidy(6_929_999) == 1
    assert chain.block_subsidy(6_930_000) == 0
    assert chain.block_subsidy(10_000_000) == 0


def test_subsidy_override():
    assert chain.block_subsidy(4, initial=16, interval=2) == 4


def _chain_with(utxo_values, owner="alice"):
    """UtxoSet holding the given values as outputs of one fake tx."""
    utxos = UtxoSet()
    t = txid("funding")
    for i, v in enumerate(utxo_values):
        utxos.entries[OutPoint(t, i)] = chain.UtxoEntry(TxOut(v, owner))
    return utxos, [OutPoint(t, i) for i in range(len(utxo_values))]


def test_tx_fee_balanced():
    utxos, ops = _chain_with([3, 3])
    tx = spend("t", ops, [TxOut(4, "bob"), TxOut(2, "bob")])
    assert chain.tx_fee(tx, utxos) == 0


def test_tx_fee_one_sat():
    # two 2-sat inputs, one 3-sat output: one satoshi goes to the miner
    utxos, ops = _chain_with([2, 2])
    tx = spend("t", ops, [TxOut(3, "bob")])
    assert chain.tx_fee(tx, utxos) == 1


def test_tx_fee_overdraw():
    utxos, ops = _chain_with([5])
    tx = spend("t", ops, [TxOut(6, "bob")])
    with pytest.raises(errors.NegativeFee):
        chain.tx_fee(tx, utxos)


def test_tx_fee_missing_prevout():
    utxos = UtxoSet()
    tx = spend("t", [OutPoint(txid("nope"), 0)], [TxOut(1, "bob")])
    with pytest.raises(errors.MissingPrevout):
        chain.tx_fee(tx, utxos)


def test_vsize_quarter_witness():
    utxos, ops = _chain_with([10])
    base = spend("t", ops, [TxOut(10, "bob")])
    body = chain.tx_body_size(base)
    with_wit = spend("t", ops, [TxOut(10, "bob")], witness=(b"x" * 400,))
    assert chain.tx_vsize(base) == body
    assert chain.tx_vsize(with_wit) == body + 100
    odd = spend("t", ops, [TxOut(10, "bob")], witness=(b"x" * 402,))
    assert chain.tx_vsize(odd) == body + 101  # ceil


def test_fee_rate_exact_rational():
    utxos, ops = _chain_with([1000])
    tx = spend("t", ops, [TxOut(999, "bob")])
    rate = chain.fee_rate(tx, utxos)
    assert isinstance(rate, Fraction)
    assert rate * chain.tx_vsize(tx) == chain.tx_fee(tx, utxos)


def test_fee_rate_zero_fee():
    utxos, ops = _chain_with([1000])
    tx = spend("t", ops, [TxOut(1000, "bob")])
    assert chain.fee_rate(tx, utxos) == 0


def test_genesis_apply(genesis):
    utxos = UtxoSet()
    report = chain.apply_block(genesis, utxos, 0)
    assert len(utxos) == 1
    assert utxos.total_value() == 5_000_000_000
    assert report.total_fees == 0


def test_double_spend_rejected(genesis):
    utxos = UtxoSet()
    chain.apply_block(genesis, utxos, 0)
    cb = genesis.txs[0]
    prev = OutPoint(cb.txid, 0)
    t1 = spend("t1", [prev], [TxOut(1, "a")])
    t2 = spend("t2", [prev], [TxOut(1, "b")])
    block = Block(1, (coinbase(1, chain.block_subsidy(1), label="cb1x"), t1, t2))
    before = copy.deepcopy(utxos.entries)
    with pytest.raises(errors.DoubleSpend):
        chain.apply_block(block, utxos, 1)
    assert utxos.entries == before  # atomic


def test_height_gap_rejected(genesis):
    utxos = UtxoSet()
    chain.apply_block(genesis, utxos, 0)
    block = Block(2, (coinbase(2, chain.block_subsidy(2)),))
    with pytest.raises(errors.NonMonotonicHeight):
        chain.apply_block(block, utxos, 1)


def test_coinbase_overpay_rejected():
    utxos = UtxoSet()
    block = Block(0, (coinbase(0, chain.block_subsidy(0) + 1),))
    with pytest.raises(errors.CoinbaseOverpay):
        chain.apply_block(block, utxos, 0)


def test_coinbase_may_underclaim():
    utxos = UtxoSet()
    block = Block(0, (coinbase(0, 42),))
    chain.apply_block(block, utxos, 0)
    assert utxos.total_value() == 42


def test_value_conservation_over_chain(genesis):
    utxos = UtxoSet()
    chain.apply_block(genesis, utxos, 0)
    prev = OutPoint(genesis.txs[0].txid, 0)
    fee_tx = spend("pay", [prev], [TxOut(4_999_999_000, "bob")])  # fee 1000
    block = Block(1, (coinbase(1, chain.block_subsidy(1) + 1000, label="cb1"),
                      fee_tx))
    chain.apply_block(block, utxos, 1)
    assert utxos.total_value() == chain.block_subsidy(0) + chain.block_subsidy(1)


def test_jsonl_round_trip(genesis):
    import io

    prev = OutPoint(genesis.txs[0].txid, 0)
    tx = spend("t", [prev], [TxOut(1, "bob", "p2tr_inscription")],
               witness=(b"\x00", b"\x63"))
    block = Block(1, (coinbase(1, chain.block_subsidy(1)), tx))
    buf = io.StringIO()
    chain.write_blocks_jsonl([genesis, block], buf)
    buf.seek(0)
    back = list(chain.read_blocks_jsonl(buf))
    assert back == [genesis, block]
