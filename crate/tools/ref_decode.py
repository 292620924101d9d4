#!/usr/bin/env python3
"""Independent WFDB record decoder used to freeze reference dumps.

This is deliberately a from-scratch implementation (standard library only)
of the three on-disk formats the Rust crate reads -- header text, format-212
signal packing, and MIT annotation streams -- so the two codebases can be
checked against each other on identical inputs.  It shares no code or
structure with the Rust parser; keep it that way.

Usage:

    python3 tools/ref_decode.py --fixtures-dir crates/ecg-core/tests/fixtures \
        --out-dir crates/ecg-core/tests/fixtures/reference 100 208 106

For each record NAME this writes NAME.header.csv, NAME.signal.csv, and
NAME.beats.csv into the output directory.
"""

import argparse
import struct
from pathlib import Path

# Display symbols for annotation codes (the standard annotation code table).
SYMBOLS = {
    1: "N", 2: "L", 3: "R", 4: "a", 5: "V", 6: "F", 7: "J", 8: "A",
    9: "S", 10: "E", 11: "j", 12: "/", 13: "Q", 14: "~", 16: "|",
    18: "s", 19: "T", 20: "*", 21: "D", 22: '"', 23: "=", 24: "p",
    25: "B", 26: "^", 27: "t", 28: "+", 29: "u", 30: "?", 31: "!",
    32: "[", 33: "]", 34: "e", 35: "n", 36: "@", 37: "x", 38: "f",
    39: "(", 40: ")", 41: "r",
}

# Codes that mark heartbeats (everything else is rhythm/quality/etc.).
BEAT_CODES = set(range(1, 14)) | {25, 30, 34, 35, 38, 41}

# Five-class families: normal, supraventricular, ventricular, fusion;
# any other beat code is "unclassifiable or paced" (Q).
AAMI = {}
for code in (1, 2, 3, 34, 11):
    AAMI[code] = "N"
for code in (8, 4, 7, 9):
    AAMI[code] = "S"
for code in (5, 10):
    AAMI[code] = "V"
AAMI[6] = "F"


def parse_header(text):
    """Returns (record dict, list of signal dicts)."""
    lines = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    fields = lines[0].split()
    name = fields[0].split("/")[0]
    n_signal = int(fields[1])
    sampling_rate = int(float(fields[2].split("/")[0]))
    n_samples = int(fields[3])

    signals = []
    for line in lines[1 : 1 + n_signal]:
        parts = line.split()
        file_name = parts[0]
        # The format field may carry a "xN" / ":N" / "+N" suffix; the leading
        # digits are the format proper.
        digits = ""
        for ch in parts[1]:
            if ch.isdigit():
                digits += ch
            else:
                break
        fmt = int(digits)

        # Gain looks like GAIN, GAIN(BASELINE), or GAIN(BASELINE)/UNITS.
        gain_field = parts[2] if len(parts) > 2 else ""
        gain_field = gain_field.split("/")[0]
        baseline = None
        if "(" in gain_field:
            gain_str, rest = gain_field.split("(", 1)
            baseline = int(rest.rstrip(")"))
        else:
            gain_str = gain_field
        gain = float(gain_str) if gain_str else 0.0
        if gain == 0.0:
            gain = 200.0  # the standard default for unspecified gain

        adc_resolution = int(parts[3]) if len(parts) > 3 else 12
        # House default matching the companion parser: records in this
        # corpus center their ADC at 1024 when the field is absent.
        adc_zero = int(parts[4]) if len(parts) > 4 else 1024
        if baseline is None:
            baseline = adc_zero
        lead = " ".join(parts[8:]) if len(parts) > 8 else ""
        signals.append(
            {
                "file": file_name,
                "format": fmt,
                "gain": gain,
                "baseline": baseline,
                "adc_zero": adc_zero,
                "adc_resolution": adc_resolution,
                "lead": lead,
            }
        )
    record = {
        "name": name,
        "n_signal": n_signal,
        "sampling_rate": sampling_rate,
        "n_samples": n_samples,
    }
    return record, signals


def decode_212(raw, total_samples):
    """Unpacks interleaved 12-bit two's-complement samples."""

    def sign12(v):
        return v - 4096 if v >= 2048 else v

    samples = []
    pos = 0
    while len(samples) < total_samples:
        remaining = total_samples - len(samples)
        if remaining == 1:
            # A lone trailing sample occupies two bytes.
            b0, b1 = raw[pos], raw[pos + 1]
            samples.append(sign12(((b1 & 0x0F) << 8) | b0))
            pos += 2
        else:
            b0, b1, b2 = raw[pos], raw[pos + 1], raw[pos + 2]
            samples.append(sign12(((b1 & 0x0F) << 8) | b0))
            samples.append(sign12(((b1 & 0xF0) << 4) | b2))
            pos += 3
    return samples


def parse_annotations(raw):
    """Returns beat annotations as (sample, code) pairs.

    Implements the MIT annotation stream: 16-bit little-endian words with a
    6-bit type in the high bits and a 10-bit time delta in the low bits.
    Pseudo-annotation types: 59 = SKIP (followed by a 32-bit delta stored
    PDP-11 style, high word first, each word little-endian), 60..62 carry
    values rather than times, 63 = AUX (delta counts text bytes, padded to
    an even length).  A zero word ends the stream.
    """
    beats = []
    time = 0
    pending_skip = 0
    pos = 0
    while pos + 2 <= len(raw):
        (word,) = struct.unpack_from("<H", raw, pos)
        pos += 2
        code = word >> 10
        delta = word & 0x3FF
        if code == 0 and delta == 0:
            break
        if code == 59:
            if delta == 0:
                (high,) = struct.unpack_from("<H", raw, pos)
                (low,) = struct.unpack_from("<H", raw, pos + 2)
                pos += 4
                value = (high << 16) | low
                if value >= 1 << 31:
                    value -= 1 << 32
                pending_skip += value
            continue
        if code in (60, 61, 62):
            continue
        if code == 63:
            pos += delta + (delta & 1)
            continue
        time += pending_skip + delta
        pending_skip = 0
        if code in BEAT_CODES:
            beats.append((time, code))
    return beats


def dump_record(fixtures_dir, out_dir, name):
    header_text = (fixtures_dir / f"{name}.hea").read_text()
    record, signals = parse_header(header_text)

    raw = (fixtures_dir / f"{name}.dat").read_bytes()
    total = record["n_samples"] * record["n_signal"]
    flat = decode_212(raw, total)
    n_signal = record["n_signal"]
    channels = [flat[i::n_signal] for i in range(n_signal)]

    beats = parse_annotations((fixtures_dir / f"{name}.atr").read_bytes())

    header_csv = out_dir / f"{name}.header.csv"
    with header_csv.open("w") as fh:
        fh.write(f"record,{record['name']}\n")
        fh.write(f"n_signal,{record['n_signal']}\n")
        fh.write(f"sampling_rate,{record['sampling_rate']}\n")
        fh.write(f"n_samples,{record['n_samples']}\n")
        for i, sig in enumerate(signals):
            fh.write(
                "signal,{},{},{:g},{},{},{},{}\n".format(
                    i,
                    sig["format"],
                    sig["gain"],
                    sig["baseline"],
                    sig["adc_zero"],
                    sig["adc_resolution"],
                    sig["lead"],
                )
            )

    signal_csv = out_dir / f"{name}.signal.csv"
    with signal_csv.open("w") as fh:
        for row in zip(*channels):
            fh.write(",".join(str(v) for v in row) + "\n")

    beats_csv = out_dir / f"{name}.beats.csv"
    with beats_csv.open("w") as fh:
        for sample, code in beats:
            symbol = SYMBOLS.get(code, "?")
            aami = AAMI.get(code, "Q")
            fh.write(f"{sample},{code},{symbol},{aami}\n")

    print(f"{name}: {record['n_samples']} samples x {n_signal} ch, {len(beats)} beats")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fixtures-dir", type=Path, required=True)
    parser.add_argument("--out-dir", type=Path, required=True)
    parser.add_argument("records", nargs="+")
    args = parser.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name in args.records:
        dump_record(args.fixtures_dir, args.out_dir, name)


if __name__ == "__main__":
    main()
