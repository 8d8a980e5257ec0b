"""Mini-batch training for the center and template models.

Both loops shuffle with the run generator, average the model's summed
loss over the examples in each batch, step Adam under a one-cycle
learning-rate schedule sized to the full run, and record one history row
per epoch. An optional callback sees each epoch and may stop early.
"""

from __future__ import annotations

import csv
from typing import Callable, Optional, Sequence

import numpy as np

from .chem import ChemError, MolGraph
from .models import CenterModel, SynthonClassifier, SynthonGroup
from .pipeline import synthon_signature
from .rxn import (CenterLabel, Reaction, TemplateLibrary, break_into_synthons,
                  extract_reaction_templates, label_centers)
from .tensor import Adam, OneCycleSchedule

__all__ = [
    "prepare_center_examples", "prepare_synthon_groups", "train_center_model",
    "train_synthon_model", "center_top1_accuracy", "synthon_class_accuracy",
    "write_history_csv",
]

EpochHook = Callable[[int, float], bool]


def prepare_center_examples(dataset: Sequence[Reaction]
                            ) -> tuple[list[MolGraph], list[CenterLabel]]:
    """Aligned (product, center label) lists; unlabelable reactions skipped."""
    products, labels = [], []
    for rxn in dataset:
        try:
            labels.append(label_centers(rxn))
        except ChemError:
            continue
        products.append(rxn.product)
    return products, labels


def prepare_synthon_groups(dataset: Sequence[Reaction],
                           library: TemplateLibrary) -> list[SynthonGroup]:
    """One labeled group per reaction whose templates extract cleanly."""
    groups = []
    for rxn in dataset:
        triples, record = extract_reaction_templates(rxn)
        if record.keys is None:
            continue
        groups.append(SynthonGroup(
            rxn.product,
            [synthon for synthon, _, _ in triples],
            [library.class_of(tpl.key) for _, _, tpl in triples]))
    return groups


def _run_epochs(n: int, epochs: int, batch_size: int, lr: float,
                one_cycle: bool, rng: np.random.Generator, optimizer: Adam,
                batch_loss, on_epoch: Optional[EpochHook]) -> list[dict]:
    if n == 0:
        raise ValueError("no trainable examples")
    n_batches = (n + batch_size - 1) // batch_size
    schedule = None
    if one_cycle:
        schedule = OneCycleSchedule(optimizer, lr, epochs * n_batches)
    history = []
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            if schedule is not None:
                schedule.step()
            loss = batch_loss(idx)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += float(loss.data) * len(idx)
        mean = total / n
        history.append({"epoch": epoch, "loss": mean, "lr": optimizer.lr})
        if on_epoch is not None and on_epoch(epoch, mean):
            break
    return history


def train_center_model(model: CenterModel, products: Sequence[MolGraph],
                       labels: Sequence[CenterLabel], epochs: int = 30,
                       batch_size: int = 128, lr: float = 1e-3,
                       rng: Optional[np.random.Generator] = None,
                       one_cycle: bool = True,
                       on_epoch: Optional[EpochHook] = None) -> list[dict]:
    if rng is None:
        rng = np.random.default_rng(0)
    optimizer = Adam(model.parameters(), lr=lr)
    model.train()

    def batch_loss(idx):
        batch_products = [products[i] for i in idx]
        batch_labels = [labels[i] for i in idx]
        return model.loss(batch_products, batch_labels) * (1.0 / len(idx))

    history = _run_epochs(len(products), epochs, batch_size, lr, one_cycle,
                          rng, optimizer, batch_loss, on_epoch)
    model.eval()
    return history


def train_synthon_model(model: SynthonClassifier, groups: Sequence[SynthonGroup],
                        epochs: int = 50, batch_size: int = 128,
                        lr: float = 1e-4,
                        rng: Optional[np.random.Generator] = None,
                        correcting: bool = True, one_cycle: bool = True,
                        on_epoch: Optional[EpochHook] = None) -> list[dict]:
    if rng is None:
        rng = np.random.default_rng(0)
    optimizer = Adam(model.parameters(), lr=lr)
    model.train()

    def batch_loss(idx):
        batch = [groups[i] for i in idx]
        return model.loss(batch, correcting=correcting) * (1.0 / len(idx))

    history = _run_epochs(len(groups), epochs, batch_size, lr, one_cycle,
                          rng, optimizer, batch_loss, on_epoch)
    model.eval()
    return history


def center_top1_accuracy(model: CenterModel, reactions: Sequence[Reaction]) -> float:
    """Fraction whose top-1 center reproduces the true synthon set."""
    hits = 0
    total = 0
    for rxn in reactions:
        try:
            truth = synthon_signature(
                break_into_synthons(rxn.product, label_centers(rxn)))
        except ChemError:
            continue
        total += 1
        top = model.topk_centers(rxn.product, 1, context=rxn.rxn_id)
        if not top:
            continue
        try:
            synthons = break_into_synthons(rxn.product, top[0][0])
        except ChemError:
            continue
        if synthon_signature(synthons) == truth:
            hits += 1
    return hits / max(1, total)


def synthon_class_accuracy(model: SynthonClassifier,
                           groups: Sequence[SynthonGroup],
                           correcting: bool = True) -> float:
    """Per-synthon top-1 class accuracy with ground-truth synthons."""
    hits = 0
    total = 0
    for grp in groups:
        dists = model.predict_dists([grp], correcting=correcting)
        for dist, label in zip(dists, grp.labels):
            total += 1
            if int(np.argmax(dist)) + 1 == label:
                hits += 1
    return hits / max(1, total)


def write_history_csv(path: str, history: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "lr"])
        for row in history:
            writer.writerow([row["epoch"], "%.12g" % row["loss"],
                             "%.12g" % row["lr"]])
