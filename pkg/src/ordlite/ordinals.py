"""Ordinal theory: satoshi numbering, notations, rarity, FIFO range tracking.

A sat is identified by its mining order, 0 .. LAST_SAT. Ranges are half-open
(start, end) tuples; every unspent output carries the ordered list of ranges
it controls.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import chain, errors
from .chain import (CYCLE_BLOCKS, DIFFICULTY_PERIOD, HALVING_INTERVAL,
                    INITIAL_SUBSIDY, SUBSIDY_EPOCHS, OutPoint, block_subsidy)

TOTAL_SUPPLY = sum(HALVING_INTERVAL * (INITIAL_SUBSIDY >> e)
                   for e in range(SUBSIDY_EPOCHS))
LAST_SAT = TOTAL_SUPPLY - 1  # 2099999997689999
FINAL_SUPPLY_HEIGHT = SUBSIDY_EPOCHS * HALVING_INTERVAL  # subsidy is 0 from here

RARITIES = ("common", "uncommon", "rare", "epic", "legendary", "mythic")


@dataclass(frozen=True)
class SatPoint:
    outpoint: OutPoint
    offset: int

    def __str__(self):
        return f"{self.outpoint}:{self.offset}"


def check_sat(n: int) -> int:
    if not 0 <= n <= LAST_SAT:
        raise errors.OrdinalError(f"sat {n} out of range")
    return n


def start_sat_of_block(height: int) -> int:
    """Cumulative subsidy of blocks [0, height)."""
    if height < 0 or height > FINAL_SUPPLY_HEIGHT:
        raise errors.HeightBeyondSupply(str(height))
    total = 0
    epoch = height // HALVING_INTERVAL
    for e in range(epoch):
        total += HALVING_INTERVAL * (INITIAL_SUBSIDY >> e)
    total += (height % HALVING_INTERVAL) * (INITIAL_SUBSIDY >> epoch
                                            if epoch < SUBSIDY_EPOCHS else 0)
    return total


def sat_to_decimal(n: int) -> tuple[int, int]:
    """(height, offset-within-block) of a sat."""
    check_sat(n)
    acc = 0
    for e in range(SUBSIDY_EPOCHS):
        subsidy = INITIAL_SUBSIDY >> e
        epoch_total = HALVING_INTERVAL * subsidy
        if acc + epoch_total > n:
            k = (n - acc) // subsidy
            return e * HALVING_INTERVAL + k, n - acc - k * subsidy
        acc += epoch_total
    raise AssertionError("unreachable for a valid sat")


def sat_from_decimal(height: int, offset: int) -> int:
    subsidy = block_subsidy(height)
    if offset < 0 or offset >= subsidy:
        raise errors.OffsetOutOfBlock(f"offset {offset} at height {height}")
    return start_sat_of_block(height) + offset


DECIMAL_RE = re.compile(r"^(\d+)\.(\d+)$")
DEGREE_RE = re.compile(r"^(\d+)°(\d+)′(\d+)″(\d+)‴$")


def render_decimal(n: int) -> str:
    height, offset = sat_to_decimal(n)
    return f"{height}.{offset}"


def parse_decimal(s: str) -> int:
    m = DECIMAL_RE.match(s)
    if not m:
        raise errors.OrdinalError(f"bad decimal notation {s!r}")
    return sat_from_decimal(int(m.group(1)), int(m.group(2)))


def render_degree(n: int) -> str:
    height, offset = sat_to_decimal(n)
    a = height // CYCLE_BLOCKS
    b = height % HALVING_INTERVAL
    c = height % DIFFICULTY_PERIOD
    return f"{a}°{b}′{c}″{offset}‴"


def parse_degree(s: str) -> int:
    m = DEGREE_RE.match(s)
    if not m:
        raise errors.OrdinalError(f"bad degree notation {s!r}")
    a, b, c, d = (int(g) for g in m.groups())
    # b fixes height mod 210000 but a cycle spans six halving epochs;
    # c (mod 2016) disambiguates which epoch within the cycle.
    for t in range(CYCLE_BLOCKS // HALVING_INTERVAL):
        height = a * CYCLE_BLOCKS + t * HALVING_INTERVAL + b
        if height % DIFFICULTY_PERIOD == c and height % HALVING_INTERVAL == b:
            return sat_from_decimal(height, d)
    raise errors.OrdinalError(f"inconsistent degree notation {s!r}")


def render_percentile(n: int) -> str:
    """Shortest truncated decimal of n/LAST*100 that parses back to n."""
    check_sat(n)
    value = Fraction(n * 100, LAST_SAT)
    for digits in range(0, 40):
        scaled = (value.numerator * 10**digits) // value.denominator
        if round(Fraction(scaled, 10**digits) * LAST_SAT / 100) == n:
            intpart, fracpart = divmod(scaled, 10**digits)
            text = str(intpart) if digits == 0 else f"{intpart}.{fracpart:0{digits}d}"
            return text + "%"
    raise AssertionError("percentile failed to round-trip")


def parse_percentile(s: str) -> int:
    if not s.endswith("%"):
        raise errors.OrdinalError(f"bad percentile {s!r}")
    value = Fraction(s[:-1])
    n = round(value * LAST_SAT / 100)
    return check_sat(n)


ALPHABET = "abcdefghijklmnopqrstuvwxyz"


def render_name(n: int) -> str:
    """Bijective base-26 of LAST - n + 1; names shorten toward the final sat."""
    check_sat(n)
    m = LAST_SAT - n + 1
    out = []
    while m > 0:
        m, rem = divmod(m - 1, 26)
        out.append(ALPHABET[rem])
    return "".join(reversed(out))


def parse_name(s: str) -> int:
    if not s or any(c not in ALPHABET for c in s):
        raise errors.InvalidNameChar(repr(s))
    m = 0
    for c in s:
        m = m * 26 + ALPHABET.index(c) + 1
    n = LAST_SAT - m + 1
    if n < 0:
        raise errors.NameOutOfRange(s)
    return n


def rarity(n: int) -> str:
    check_sat(n)
    if n == 0:
        return "mythic"
    height, offset = sat_to_decimal(n)
    if offset != 0:
        return "common"
    if height % CYCLE_BLOCKS == 0:
        return "legendary"
    if height % HALVING_INTERVAL == 0:
        return "epic"
    if height % DIFFICULTY_PERIOD == 0:
        return "rare"
    return "uncommon"


def parse_sat_query(s: str) -> int:
    """Accept any of the five notations."""
    s = s.strip()
    if s.isdigit():
        return check_sat(int(s))
    if DEGREE_RE.match(s):
        return parse_degree(s)
    if DECIMAL_RE.match(s):
        return parse_decimal(s)
    if s.endswith("%"):
        return parse_percentile(s)
    if all(c in ALPHABET for c in s) and s:
        return parse_name(s)
    raise errors.BadSatQuery(repr(s))


def sat_info(n: int) -> dict:
    return {
        "n": n,
        "decimal": render_decimal(n),
        "degree": render_degree(n),
        "percentile": render_percentile(n),
        "name": render_name(n),
        "rarity": rarity(n),
    }


# --- FIFO range assignment ---

def range_total(ranges) -> int:
    return sum(end - start for start, end in ranges)


class _RangeCursor:
    def __init__(self, ranges):
        self.ranges = list(ranges)
        self.i = 0

    def take(self, amount: int) -> list:
        taken = []
        while amount > 0:
            if self.i >= len(self.ranges):
                raise errors.RangeValueMismatch("ran out of sats")
            start, end = self.ranges[self.i]
            size = end - start
            if size <= amount:
                taken.append((start, end))
                amount -= size
                self.i += 1
            else:
                taken.append((start, start + amount))
                self.ranges[self.i] = (start + amount, end)
                amount = 0
        return taken

    def rest(self) -> list:
        out = self.ranges[self.i:]
        self.i = len(self.ranges)
        return out


def slice_ranges(input_ranges, output_values):
    """FIFO split: concatenated input ranges carved into outputs in order.

    Returns (per-output range lists, remainder ranges). The remainder holds
    the fee sats, in order.
    """
    cursor = _RangeCursor(input_ranges)
    outputs = [cursor.take(v) for v in output_values]
    return outputs, cursor.rest()


def assign_ordinals(block: chain.Block, utxos: chain.UtxoSet,
                    *, subsidy=None) -> tuple[dict, list]:
    """Compute sat ranges for every output a block creates.

    Non-coinbase txs are processed in block order; each tx's fee remainder is
    appended, in order, after the freshly minted subsidy range in the
    coinbase's range pool. Returns (OutPoint -> range list, burned ranges).
    Burned ranges arise when the coinbase claims less than subsidy + fees.
    """
    if subsidy is None:
        subsidy = block_subsidy(block.height)
    assigned: dict[OutPoint, list] = {}
    fee_tail: list = []
    for tx in block.txs[1:]:
        pool = []
        for tin in tx.inputs:
            if tin.prevout in assigned:
                # within-block chaining: the earlier output's ranges are here
                pool.extend(assigned[tin.prevout])
            else:
                entry = utxos.require(tin.prevout)
                if range_total(entry.sat_ranges) != entry.txout.value:
                    raise errors.RangeValueMismatch(str(tin.prevout))
                pool.extend(entry.sat_ranges)
        out_ranges, remainder = slice_ranges(pool, [o.value for o in tx.outputs])
        for i, ranges in enumerate(out_ranges):
            assigned[OutPoint(tx.txid, i)] = ranges
        fee_tail.extend(remainder)

    coinbase = block.txs[0]
    start = start_sat_of_block(block.height)
    pool = ([(start, start + subsidy)] if subsidy > 0 else []) + fee_tail
    out_ranges, burned = slice_ranges(pool, [o.value for o in coinbase.outputs])
    for i, ranges in enumerate(out_ranges):
        assigned[OutPoint(coinbase.txid, i)] = ranges
    return assigned, burned


def locate_sat(n: int, utxos: chain.UtxoSet) -> SatPoint:
    check_sat(n)
    for outpoint, entry in utxos.entries.items():
        offset = 0
        for start, end in entry.sat_ranges:
            if start <= n < end:
                return SatPoint(outpoint, offset + (n - start))
            offset += end - start
    raise errors.SatNotInUtxoSet(str(n))
