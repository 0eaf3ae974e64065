"""Command-line front end: ``qaes keygen|encrypt|decrypt|nist|bench|profile``.

Exit codes: 0 success, 1 randomness verdict failed or unexpected error,
2 invalid input, 3 QBER abort, 4 pulse budget exhausted, 5 key stream
exhausted, 6 bad padding, 7 header mismatch.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from qaes import bb84, bench
from qaes._backend import BACKEND
from qaes.bb84 import ChannelConfig
from qaes.channel import Transcript
from qaes.errors import QaesError
from qaes.mode import (
    DerivedProvider,
    FixedProvider,
    KeyMode,
    KeyStream,
    QaesCiphertext,
    QaesConfig,
    qaes_decrypt,
    qaes_encrypt,
)
from qaes.nist import TEST_NAMES, BitSequence, run_suite

SEED_ENV = "QAES_SEED"


def _fail(exc: QaesError):
    click.echo(f"error: {exc}", err=True)
    sys.exit(exc.exit_code)


def _csv_list(kind):
    def convert(ctx, param, value):
        if value is None:
            return None
        try:
            return [kind(v) for v in str(value).split(",") if v.strip()]
        except ValueError as exc:
            raise click.BadParameter(str(exc)) from None
    return convert


def _load_config(ctx, param, value):
    if value:
        ctx.default_map = json.loads(Path(value).read_text())
    return value


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), callback=_load_config,
              is_eager=True, expose_value=False,
              help="JSON file mapping subcommand names to default option values.")
@click.version_option(package_name="artifact")
def main():
    """AES keyed by simulated BB84 quantum keys."""


def _channel_options(f):
    f = click.option("--seed", type=int, envvar=SEED_ENV, default=0, show_default=True,
                     help=f"RNG seed (default from ${SEED_ENV}).")(f)
    f = click.option("--eve/--no-eve", default=False, help="Enable the intercept-resend eavesdropper.")(f)
    f = click.option("--noise", type=click.FloatRange(0, 1), default=0.0, show_default=True,
                     help="Per-pulse depolarizing probability.")(f)
    return f


def _bb84_options(f):
    f = click.option("--sacrifice", type=click.FloatRange(0, 1, min_open=True, max_open=True),
                     default=bb84.DEFAULT_SACRIFICE, show_default=True)(f)
    f = click.option("--threshold", type=float, default=bb84.DEFAULT_ABORT_THRESHOLD, show_default=True,
                     help="QBER abort threshold.")(f)
    return f


@main.command()
@click.option("--bits", type=click.IntRange(min=8), default=128, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default="master.hex", show_default=True,
              help="Key file for the sender's key (one lowercase hex key per line).")
@click.option("--receiver-out", type=click.Path(dir_okay=False),
              help="Also write the receiver's copy of the key.")
@click.option("--transcript", type=click.Path(dir_okay=False),
              help="Write the protocol messages as JSON lines.")
@_bb84_options
@_channel_options
def keygen(bits, out_path, receiver_out, transcript, sacrifice, threshold, noise, eve, seed):
    """Run BB84 and write the resulting key."""
    if bits % 8:
        raise click.BadParameter("--bits must be a multiple of 8", param_hint="--bits")
    log = Transcript() if transcript else None
    try:
        key = bb84.generate_key(bits, ChannelConfig(noise, eve, seed), sacrifice_fraction=sacrifice,
                                abort_threshold=threshold, transcript=log)
    except QaesError as exc:
        if log is not None:
            Path(transcript).write_text(log.dumps())
        _fail(exc)
    _write_secret(out_path, key.hex() + "\n")
    if receiver_out:
        _write_secret(receiver_out, key.hex(receiver=True) + "\n")
    if log is not None:
        Path(transcript).write_text(log.dumps())
    click.echo(
        f"bits={len(key)} pulses_pumped={key.pulses_pumped} sifted={key.sifted_bits} "
        f"sampled={key.sample_size} qber={key.qber_estimate:.4f} "
        f"yield={len(key) / key.pulses_pumped:.4f} t_qkg_ms={key.generation_time * 1e3:.4f} "
        f"agreed={key.agreed}"
    )


def _write_secret(path, text: str) -> None:
    # key files are created owner-only
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    os.fchmod(fd, 0o600)
    with os.fdopen(fd, "w") as fh:
        fh.write(text)


def _read_hex_key(path) -> bytes:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise click.BadParameter(f"{path} holds no key")
    return bytes.fromhex(lines[0])


def _provider(master, key_file, fixed_key, key_bytes):
    chosen = [x for x in (master, key_file, fixed_key) if x]
    if len(chosen) != 1:
        raise click.UsageError("give exactly one of --master, --key-file, --fixed-key")
    if master:
        raw = _read_hex_key(master)
        if len(raw) not in (16, 24, 32):
            raise click.BadParameter("master key must be 128, 192 or 256 bits", param_hint="--master")
        return DerivedProvider(raw, key_bytes)
    if key_file:
        return KeyStream.from_file(key_file)
    return FixedProvider(bytes.fromhex(fixed_key))


def _key_options(f):
    f = click.option("--fixed-key", help="Hex key reused for every block (testing only).")(f)
    f = click.option("--key-file", type=click.Path(exists=True, dir_okay=False),
                     help="Materialized key stream, one hex key per line.")(f)
    f = click.option("--master", type=click.Path(exists=True, dir_okay=False),
                     help="Master key file from `qaes keygen`; keys are derived from it.")(f)
    return f


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--key-size", type=click.Choice(["128", "192", "256"]), default="128", show_default=True)
@click.option("--key-mode", type=click.Choice([m.value for m in KeyMode]), default="per-block",
              show_default=True)
@_key_options
@click.option("-v", "--verbose", is_flag=True)
def encrypt(in_path, out_path, key_size, key_mode, master, key_file, fixed_key, verbose):
    """Encrypt a file into the QAES container format."""
    config = QaesConfig(int(key_size), KeyMode(key_mode))
    try:
        provider = _provider(master, key_file, fixed_key, config.key_bytes)
        ct = qaes_encrypt(Path(in_path).read_bytes(), config, provider)
    except QaesError as exc:
        _fail(exc)
    Path(out_path).write_bytes(ct.to_bytes())
    if verbose:
        _report_stream(config, ct.block_count, provider)


def _report_stream(config, blocks, provider):
    per_block = config.stream_bytes_per_block
    chunks = per_block / 16
    click.echo(
        f"blocks={blocks} key_mode={config.key_mode.value} key_size={config.key_size_bits} "
        f"stream_chunks_per_block={chunks:g} stream_bytes_per_block={per_block} "
        f"stream_bytes_consumed={provider.consumed} backend={BACKEND}"
    )


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--key-size", type=click.Choice(["128", "192", "256"]),
              help="Expected key size; defaults to the container header.")
@click.option("--key-mode", type=click.Choice([m.value for m in KeyMode]),
              help="Expected key mode; defaults to the container header.")
@_key_options
@click.option("-v", "--verbose", is_flag=True)
def decrypt(in_path, out_path, key_size, key_mode, master, key_file, fixed_key, verbose):
    """Decrypt a QAES container."""
    try:
        ct = QaesCiphertext.from_bytes(Path(in_path).read_bytes())
        config = QaesConfig(int(key_size) if key_size else ct.key_size_bits,
                            KeyMode(key_mode) if key_mode else ct.key_mode)
        provider = _provider(master, key_file, fixed_key, config.key_bytes)
        plain = qaes_decrypt(ct, config, provider)
    except QaesError as exc:
        _fail(exc)
    Path(out_path).write_bytes(plain)
    if verbose:
        _report_stream(config, ct.block_count, provider)


@main.command()
@click.option("--input", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--bits", type=click.IntRange(min=1), help="Test only the first BITS bits.")
@click.option("--tests", callback=_csv_list(str), help=f"Comma list from: {', '.join(TEST_NAMES)}.")
@click.option("--skip-header", is_flag=True, help="Drop a QAES container header before testing.")
@click.option("--report", type=click.Path(dir_okay=False), help="JSON-lines report file.")
@click.option("--summary", type=click.Path(dir_okay=False), help="Human-readable summary file.")
@click.option("--max-failures", type=click.IntRange(min=0), default=1, show_default=True,
              help="Rejections tolerated before the verdict fails.")
def nist(in_path, bits, tests, skip_header, report, summary, max_failures):
    """Run the randomness tests on a file; exit 1 if too many tests reject."""
    data = Path(in_path).read_bytes()
    if skip_header:
        data = QaesCiphertext.from_bytes(data).body
    n = min(bits, 8 * len(data)) if bits else 8 * len(data)
    if n == 0:
        raise click.BadParameter("input file is empty", param_hint="--input")
    try:
        result = run_suite(BitSequence.from_bytes(data, n), tests)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--tests") from None
    table = result.summary_table()
    if report:
        Path(report).write_text(result.to_jsonl())
    if summary:
        Path(summary).write_text(table)
    click.echo(table, nl=False)
    if result.total - result.passed_count > max_failures:
        sys.exit(1)


@main.command(name="bench")
@click.option("--sizes", callback=_csv_list(int), default=",".join(map(str, bench.DEFAULT_SIZES_KB)),
              show_default=True, help="Input sizes in KiB.")
@click.option("--algorithms", callback=_csv_list(str), default="AES,QAES", show_default=True)
@click.option("--key-size", type=click.Choice(["128", "192", "256"]), default="128", show_default=True)
@click.option("--key-mode", type=click.Choice([m.value for m in KeyMode]), default="per-block",
              show_default=True)
@click.option("--reps", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--warmup", type=click.IntRange(min=0), default=3, show_default=True)
@click.option("--seed", type=int, envvar=SEED_ENV, default=0, show_default=True)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default="bench.csv", show_default=True)
@click.option("--plot", "plot_path", type=click.Path(dir_okay=False), help="Gnuplot data file of medians.")
def bench_cmd(sizes, algorithms, key_size, key_mode, reps, warmup, seed, csv_path, plot_path):
    """Time AES against QAES (T_qenc = T_qkg + T_enc) and write a CSV."""
    if not sizes or any(s <= 0 for s in sizes):
        raise click.BadParameter("sizes must be positive", param_hint="--sizes")
    try:
        records = bench.run_benchmark(sizes, algorithms, int(key_size), reps, warmup, seed,
                                      key_mode=KeyMode(key_mode))
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None
    except QaesError as exc:
        _fail(exc)
    with open(csv_path, "w", newline="") as fh:
        bench.write_csv(records, fh)
    summary = bench.summarize(records)
    if plot_path:
        with open(plot_path, "w") as fh:
            bench.write_plot_data(summary, fh)
    click.echo(f"{'algorithm':<6} {'key':>4} {'input_kb':>8} {'keygen_ms':>10} {'encrypt_ms':>11} {'total_ms':>10}")
    for s in summary:
        click.echo(f"{s.algorithm:<6} {s.key_size_bits:>4} {s.input_size_kb:>8} {s.t_keygen_ns / 1e6:>10.4f} "
                   f"{s.t_encrypt_ns / 1e6:>11.4f} {s.t_total_ns / 1e6:>10.4f}")


@main.command()
@click.option("--pulses", callback=_csv_list(int), default="500", show_default=True,
              help="Fixed pulse budgets (ignored with --target).")
@click.option("--target", type=click.IntRange(min=1), help="Pump until this many key bits survive.")
@click.option("--noise", callback=_csv_list(float), default="0,0.05,0.1", show_default=True)
@click.option("--eve", type=click.Choice(["off", "on", "both"]), default="both", show_default=True)
@click.option("--seeds", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Per-run rows as CSV.")
def profile(pulses, target, noise, eve, seeds, csv_path):
    """Key-generation yield and time across noise and eavesdropper settings."""
    eves = {"off": (False,), "on": (True,), "both": (False, True)}[eve]
    if target:
        rows = bench.keygen_target_profile(target, noise, eves, range(seeds))
    else:
        rows = bench.keygen_profile(pulses, noise, eves, range(seeds))
    if csv_path:
        import csv
        import dataclasses

        with open(csv_path, "w", newline="") as fh:
            fields = [f.name for f in dataclasses.fields(bench.ProfileRow)]
            writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            writer.writeheader()
            for r in rows:
                writer.writerow(dataclasses.asdict(r))
    click.echo(bench.profile_table(rows), nl=False)


if __name__ == "__main__":
    main()
