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
"""Drives tools/nli_server.py through the typent CLI with a tiny, randomly
initialized BERT classifier built on the spot (no downloads)."""

import json
import os
import subprocess
import sys
import tempfile

import torch
from transformers import BertConfig, BertForSequenceClassification, BertTokenizer


def build_model(path, words):
    specials = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", ".", ","]
    vocab = specials + sorted(set(words) - set(specials))
    with open(os.path.join(path, "vocab.txt"), "w") as f:
        f.write("\n".join(vocab) + "\n")
    BertTokenizer(os.path.join(path, "vocab.txt")).save_pretrained(path)
    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=16,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=32,
        num_labels=3,
        id2label={0: "contradiction", 1: "neutral", 2: "entailment"},
        label2id={"contradiction": 0, "neutral": 1, "entailment": 2},
    )
    BertForSequenceClassification(config).save_pretrained(path)


def run(typent, args):
    proc = subprocess.run([typent] + args, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit("typent %s failed (%d):\n%s" % (args[0], proc.returncode, proc.stderr))


def main():
    typent, server, golden = sys.argv[1:4]
    words = set()
    for name in ("train.jsonl", "test.jsonl", "vocab.txt"):
        with open(os.path.join(golden, name)) as f:
            words.update(f.read().lower().replace('"', " ").split())
    with tempfile.TemporaryDirectory() as tmp:
        model_dir = os.path.join(tmp, "model")
        os.makedirs(model_dir)
        build_model(model_dir, words)
        scorer = "scorer=exec:%s %s --model %s --batch-size 8" % (
            sys.executable, server, model_dir)
        common = [
            "--set", "train_path=" + os.path.join(golden, "train.jsonl"),
            "--set", "dev_path=" + os.path.join(golden, "dev.jsonl"),
            "--set", "test_path=" + os.path.join(golden, "test.jsonl"),
            "--set", "vocab_path=" + os.path.join(golden, "vocab.txt"),
            "--set", "tier_path=" + os.path.join(golden, "tiers.tsv"),
            "--set", scorer,
        ]
        out = os.path.join(tmp, "out")
        run(typent, ["predict", "--out", out] + common)
        with open(os.path.join(out, "predictions.jsonl")) as f:
            preds = [json.loads(line) for line in f]
        assert len(preds) == 20, len(preds)
        for p in preds:
            assert p["chosen"], p
            for item in p["topk"]:
                assert 0.0 <= item["score"] <= 1.0, item

        run(typent, ["train", "--out", out] + common + [
            "--set", "scorer_trainable=true", "--set", "max_epochs=2",
            "--set", "eval_every=1"])
        with open(os.path.join(out, "train_log.jsonl")) as f:
            log = [json.loads(line) for line in f]
        assert [r["epoch"] for r in log] == [0, 1, 2], log
        with open(os.path.join(out, "best_checkpoint.json")) as f:
            best = json.load(f)
        assert best["checkpoint"].startswith("hf-ckpt-"), best
        assert not best["aborted"], best
    print("nli_server smoke test passed")


if __name__ == "__main__":
    main()
