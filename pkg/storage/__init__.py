# storage/__init__.py
"""
Persistence of trained networks and Chebyshev coefficient grids.

Example:
    from storage import save_checkpoint, load_checkpoint, restore_model
    save_checkpoint("runs/best.ckpt", model, adam_state, epoch=12, best_val_loss=0.21)
    model = restore_model(load_checkpoint("runs/best.ckpt"))
"""
from .checkpoint import (
    MAGIC,
    FORMAT_VERSION,
    Checkpoint,
    save_checkpoint,
    load_checkpoint,
    restore_model,
    save_coeff_grid,
    load_coeff_grid,
)

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "restore_model",
    "save_coeff_grid",
    "load_coeff_grid",
]
