#!/usr/bin/env python3
# Copyright 2026 The typent Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Scorer endpoint for a Hugging Face sequence-classification NLI model.

Speaks the typent JSONL protocol on stdin/stdout (default) or on a TCP port:

  {"id", "premise", "hypothesis"}            -> {"id", "entailment"}
  {"op": "loss", "id", "positive", "negatives", "margin", "weight"}
                                             -> {"id", "loss"}
  {"op": "update", "id"}                     -> {"id", "ok": true}
  {"op": "snapshot", "id"}                   -> {"id", "tag"}
  {"op": "restore", "id", "tag"}             -> {"id", "ok": true}

Score requests are buffered and run through the model in batches. The
entailment score is the softmax mass of the model's entailment class.

Example:
  typent predict --config run.json \\
      --set 'scorer=exec:python3 tools/nli_server.py --model roberta-large-mnli'
"""

import argparse
import copy
import json
import select
import socket
import sys


def entailment_index(config):
    for idx, name in config.id2label.items():
        if str(name).lower().startswith("entail"):
            return int(idx)
    raise SystemExit("model config has no entailment label: %r" % config.id2label)


class Model:
    def __init__(self, args):
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self.torch = torch
        self.device = torch.device(args.device)
        self.tokenizer = AutoTokenizer.from_pretrained(args.model)
        self.model = AutoModelForSequenceClassification.from_pretrained(args.model)
        self.model.to(self.device)
        self.entail = entailment_index(self.model.config)
        self.max_length = args.max_length
        self.optimizer = torch.optim.AdamW(self.model.parameters(), lr=args.lr)
        self.optimizer.zero_grad()
        self.snapshots = {}

    def _probs(self, pairs):
        enc = self.tokenizer(
            [p for p, _ in pairs],
            [h for _, h in pairs],
            padding=True,
            truncation=True,
            max_length=self.max_length,
            return_tensors="pt",
        ).to(self.device)
        logits = self.model(**enc).logits
        return logits.softmax(dim=-1)[:, self.entail]

    def score(self, pairs):
        self.model.eval()
        with self.torch.no_grad():
            return [float(x) for x in self._probs(pairs)]

    def loss(self, positive, negatives, margin, weight):
        self.model.train()
        probs = self._probs([positive] + negatives)
        hinge = (probs[1:] - probs[0] + margin).clamp(min=0).mean()
        (hinge * weight).backward()
        return float(hinge.detach())

    def update(self):
        self.optimizer.step()
        self.optimizer.zero_grad()

    def snapshot(self):
        tag = "hf-ckpt-%d" % len(self.snapshots)
        self.snapshots[tag] = copy.deepcopy(
            {k: v.detach().cpu() for k, v in self.model.state_dict().items()}
        )
        return tag

    def restore(self, tag):
        self.model.load_state_dict(self.snapshots[tag])
        self.optimizer.zero_grad()


def pair_of(obj):
    return obj["premise"], obj["hypothesis"]


def serve(model, lines, write, batch_size):
    """Answers every request from `lines`. Score requests are answered in
    batches; a batch is flushed when full, before any op, and whenever the
    input has no further complete line ready."""
    pending = []

    def flush():
        if not pending:
            return
        scores = model.score([pair_of(r) for r in pending])
        for req, s in zip(pending, scores):
            write({"id": req["id"], "entailment": s})
        pending.clear()

    for line, more_ready in lines:
        if not line.strip():
            if not more_ready:
                flush()
            continue
        req = json.loads(line)
        op = req.get("op")
        if op is None:
            pending.append(req)
            if len(pending) >= batch_size or not more_ready:
                flush()
            continue
        flush()
        resp = {"id": req["id"]}
        try:
            if op == "loss":
                resp["loss"] = model.loss(
                    pair_of(req["positive"]),
                    [pair_of(n) for n in req["negatives"]],
                    float(req["margin"]),
                    float(req["weight"]),
                )
            elif op == "update":
                model.update()
                resp["ok"] = True
            elif op == "snapshot":
                resp["tag"] = model.snapshot()
            elif op == "restore":
                model.restore(req["tag"])
                resp["ok"] = True
            else:
                resp["error"] = "unknown op %r" % op
        except Exception as exc:  # reported to the client, which aborts
            resp["error"] = "%s: %s" % (type(exc).__name__, exc)
        write(resp)
    flush()


def lines_from(stream):
    """Yields (line, more_ready) where more_ready tells whether another
    complete line is already buffered or readable without blocking."""
    buf = b""
    fd = stream.fileno()
    eof = False
    while True:
        while b"\n" not in buf and not eof:
            chunk = stream.read1(65536) if hasattr(stream, "read1") else stream.read(65536)
            if not chunk:
                eof = True
            buf += chunk
        if b"\n" not in buf:
            if buf:
                yield buf.decode("utf-8"), False
            return
        line, buf = buf.split(b"\n", 1)
        more = b"\n" in buf
        if not more and not eof:
            ready, _, _ = select.select([fd], [], [], 0)
            more = bool(ready)
        yield line.decode("utf-8"), more


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", required=True, help="model name or local path")
    ap.add_argument("--device", default="cpu")
    ap.add_argument("--batch-size", type=int, default=32)
    ap.add_argument("--max-length", type=int, default=256)
    ap.add_argument("--lr", type=float, default=5e-6)
    ap.add_argument("--port", type=int, help="serve one TCP client on this port")
    args = ap.parse_args()

    model = Model(args)

    if args.port is None:
        out = sys.stdout

        def write(obj):
            out.write(json.dumps(obj) + "\n")
            out.flush()

        serve(model, lines_from(sys.stdin.buffer), write, args.batch_size)
        return

    srv = socket.create_server(("127.0.0.1", args.port))
    print("listening on 127.0.0.1:%d" % args.port, file=sys.stderr, flush=True)
    conn, _ = srv.accept()
    rfile = conn.makefile("rb", buffering=0)
    wfile = conn.makefile("w", encoding="utf-8")

    def write_tcp(obj):
        wfile.write(json.dumps(obj) + "\n")
        wfile.flush()

    serve(model, lines_from(rfile), write_tcp, args.batch_size)


if __name__ == "__main__":
    main()
