SMALL_CONFIG = {
    "seed": 3,
    "ingest": {"nodes": 5, "days": 4, "t_s": 600},
    "attack": {"start_times": ["02:00"], "durations": [14400], "ratios": [0.6], "ks": [0.0, 1.0]},
    "features": {"n_t": 3, "train_days": 2, "val_days": 1, "test_days": 1},
    "model": {"kind": "MLP", "arch": "MM-WC"},
    "train": {"epochs": 1, "batch_size": 64},
    "trends": {"seeds": [0], "random_trials": 2, "selection_n": 3},
}
