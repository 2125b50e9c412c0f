"""Rule-based explanations for anomaly-detector scores.

The heavy lifting lives in the compiled ``_dtor`` extension; this package
re-exports its surface. Typical flow::

    import dtor

    ds = dtor.load_table("table.csv")
    train, test, train_idx, test_idx = dtor.split_train_test(ds, n_test=50, seed=42)
    model = dtor.fit_isolation_forest(train, seed=42)
    th = dtor.threshold_from_contamination(model.score_dataset(train), 0.05)

    x = test.row(0)
    y = model.score([x])[0]
    rule, tree_json = dtor.explain_instance(x, y, train, model.score_dataset(train))
    print(dtor.render(rule, train), dtor.estimate_precision(y, rule, model, th, train, x))
"""

try:
    from ._dtor import *  # noqa: F401,F403  (installed layout: dtor/_dtor.so)
    from ._dtor import __version__  # noqa: F401
except ImportError:  # build-tree layout: _dtor.so on PYTHONPATH
    from _dtor import *  # noqa: F401,F403
    from _dtor import __version__  # noqa: F401
