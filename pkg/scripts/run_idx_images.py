"""Image-retrieval experiment on IDX-format data (e.g. the MNIST files).

Trains the pairwise-label model on a per-class subset of the training images,
trains the reconstruction model on the same subset, and compares label-mAP on
held-out queries.  Point --train-images/--train-labels at IDX files; queries
come from --query-images/--query-labels when given, otherwise from unused
training images.

Usage:
    python scripts/run_idx_images.py --train-images train-images-idx3-ubyte \\
        --train-labels train-labels-idx1-ubyte --per-class 500 --bits 16
"""

import argparse
import sys

import numpy as np

from hashlearn.dataio import load_idx
from hashlearn.evaluation import evaluate, label_gt
from hashlearn.network import SUPERVISED, UNSUPERVISED
from hashlearn.trainer import TrainConfig, encode, train_supervised, train_unsupervised


def parse_args(argv):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--train-images", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--query-images")
    p.add_argument("--query-labels")
    p.add_argument("--per-class", type=int, default=500)
    p.add_argument("--n-queries", type=int, default=500)
    p.add_argument("--bits", type=int, default=16)
    p.add_argument("--seed", type=int, default=42)
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    train = load_idx(args.train_images, args.train_labels)
    print("loaded %d training images (%d-dimensional)" % (train.x.shape[1], train.x.shape[0]))

    print("training pairwise-label model (%d per class) ..." % args.per_class)
    scfg = TrainConfig.defaults(SUPERVISED, train.x.shape[0], args.bits,
                                n_per_class=args.per_class, center_inputs=True, seed=args.seed)
    sres = train_supervised(train.x, train.labels, scfg)
    print("  status %s, final loss %.5f" % (sres.status, sres.loss_trace[-1]))
    subset = sres.subset_indices
    x_db, db_labels = train.x[:, subset], train.labels[subset]

    print("training reconstruction model on the same %d samples ..." % x_db.shape[1])
    ucfg = TrainConfig.defaults(UNSUPERVISED, train.x.shape[0], args.bits,
                                center_inputs=True, seed=args.seed)
    ures = train_unsupervised(x_db, ucfg)
    print("  status %s, final loss %.5f" % (ures.status, ures.loss_trace[-1]))

    rng = np.random.default_rng(args.seed)
    if args.query_images:
        pool = load_idx(args.query_images, args.query_labels)
        pool_x, pool_labels = pool.x, pool.labels
    else:
        unused = np.setdiff1d(np.arange(train.x.shape[1]), subset)
        pool_x, pool_labels = train.x[:, unused], train.labels[unused]
    pick = rng.choice(pool_x.shape[1], size=min(args.n_queries, pool_x.shape[1]), replace=False)
    x_q, q_labels = pool_x[:, pick], pool_labels[pick]
    gt = label_gt(db_labels, q_labels)

    for name, res in (("pairwise-label", sres), ("reconstruction", ures)):
        report = evaluate(encode(res.params, x_db), encode(res.params, x_q), gt)
        radii = "  ".join("p@%d %.3f" % (r, report.precision_at[r]) for r in report.radii)
        print("  %-14s mAP %.3f   %s" % (name, report.mean_ap, radii))
    return 0


if __name__ == "__main__":
    sys.exit(main())
