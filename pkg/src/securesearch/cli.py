"""Command line client.

    securesearch [--config cfg.json] upload DIR
    securesearch cluster --k 30
    securesearch search "armed robbery" [--shards 3] [--limit 10]
    securesearch get DOC_ID --out PATH
    securesearch eval --queries q.txt --judgments j.tsv
    securesearch keygen PATH
    securesearch serve STATE_DIR [--host H] [--port P]

Results go to stdout, diagnostics to stderr.  Exit status is 0 on success
and 1 on any error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .client import Client, ClientConfig, ClientError
from .crypto import CryptoError, TermKey
from .evaluation import load_judgments, load_queries, tsap_at_10
from .query import InvalidQueryError


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def cmd_upload(client: Client, args) -> int:
    root = Path(args.dir)
    if not root.is_dir():
        _err(f"{root} is not a directory")
        return 1
    files = sorted(p for p in root.rglob("*") if p.is_file() and not p.name.startswith("."))
    ok = failed = 0
    for path in files:
        try:
            doc_id = client.upload_file(path)
        except (OSError, UnicodeDecodeError, ClientError) as exc:
            _err(f"{path}: {exc}")
            failed += 1
            continue
        print(doc_id)
        ok += 1
    print(f"{ok} documents uploaded", file=sys.stderr)
    return 1 if failed else 0


def cmd_cluster(client: Client, args) -> int:
    extra = {}
    if args.alpha is not None:
        extra["shard_growth_factor"] = args.alpha
    if args.iterations is not None:
        extra["max_iterations"] = args.iterations
    res = client.cluster(args.k, **extra)
    print(f"shards={res['shards']} iterations={res['iterations']} "
          f"moved_last_iteration={res['moved_last_iteration']}")
    return 0


def cmd_search(client: Client, args) -> int:
    try:
        results = client.search(args.query, args.shards, args.limit)
    except ClientError as exc:
        if exc.code == "not_clustered":
            _err("run cluster first")
            return 1
        raise
    if not results:
        print("no results")
    for doc_id, score in results:
        print(f"{doc_id}\t{score:.6f}")
    return 0


def cmd_get(client: Client, args) -> int:
    try:
        data = client.get(args.doc_id)
    except CryptoError as exc:
        _err(f"cannot decrypt {args.doc_id}: {exc}")
        return 1
    Path(args.out).write_bytes(data)
    print(args.out)
    return 0


def cmd_eval(client: Client, args) -> int:
    queries = load_queries(args.queries)
    judgments = load_judgments(args.judgments)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["query", "tsap10"])
    for q in queries:
        ranked = [d for d, _ in client.search(q, args.shards, 10)]
        out.writerow([q, f"{tsap_at_10(ranked, judgments, q):.6f}"])
    stats = client.stats()
    ratio = stats["index_bytes"] / stats["corpus_bytes"] if stats["corpus_bytes"] else float("nan")
    sizes = np.asarray(stats["shard_sizes"], dtype=float)
    variance = float(sizes.var()) if sizes.size else 0.0
    print(f"index_overhead_ratio={ratio:.6f}")
    print(f"shard_size_variance={variance:.6f}")
    return 0


def cmd_keygen(args) -> int:
    path = Path(args.path)
    if path.exists() and not args.force:
        _err(f"{path} exists; use --force to overwrite")
        return 1
    TermKey.generate().save(path)
    print(path)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app
    from .server import SearchServer

    uvicorn.run(create_app(SearchServer(args.state_dir)), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="securesearch", description=__doc__.split("\n")[0])
    p.add_argument("--config", help="client config JSON (CS_* environment variables override)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("upload", help="extract, encrypt and upload every file in DIR")
    s.add_argument("dir")

    s = sub.add_parser("cluster", help="partition the server index into shards")
    s.add_argument("--k", type=int, default=30)
    s.add_argument("--alpha", type=float, default=None, help="shard growth factor")
    s.add_argument("--iterations", type=int, default=None)

    s = sub.add_parser("search")
    s.add_argument("query")
    s.add_argument("--shards", type=int, default=None, help="number of shards to search")
    s.add_argument("--limit", type=int, default=10)

    s = sub.add_parser("get", help="download and decrypt a document")
    s.add_argument("doc_id")
    s.add_argument("--out", required=True)

    s = sub.add_parser("eval", help="TSAP@10 per query plus index statistics")
    s.add_argument("--queries", required=True)
    s.add_argument("--judgments", required=True)
    s.add_argument("--shards", type=int, default=None)

    s = sub.add_parser("keygen", help="write a fresh random key file")
    s.add_argument("path")
    s.add_argument("--force", action="store_true")

    s = sub.add_parser("serve", help="run the HTTP server")
    s.add_argument("state_dir")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8350)
    return p


COMMANDS = {"upload": cmd_upload, "cluster": cmd_cluster, "search": cmd_search,
            "get": cmd_get, "eval": cmd_eval}


def main(argv=None, http=None) -> int:
    """Entry point.  ``http`` injects an ``httpx.Client``-like transport (tests)."""
    args = build_parser().parse_args(argv)
    if args.command == "keygen":
        return cmd_keygen(args)
    if args.command == "serve":
        return cmd_serve(args)
    try:
        cfg = ClientConfig.load(args.config)
        client = Client.from_config(cfg, http=http)
        return COMMANDS[args.command](client, args)
    except ClientError as exc:
        _err(exc)
        return 1
    except (OSError, ValueError, InvalidQueryError, CryptoError) as exc:
        _err(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
