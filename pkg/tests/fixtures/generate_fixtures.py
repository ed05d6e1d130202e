"""Regenerate the committed store fixtures. Run from the repository root:

    python tests/fixtures/generate_fixtures.py
"""

from pathlib import Path

from domainid.store import save_store
from domainid.synthetic import two_domain_store

HERE = Path(__file__).parent


def main() -> None:
    store = two_domain_store(
        n_dims=16, classes_per_domain=6, samples_per_class=10, seed=0
    )
    save_store(store, HERE / "synthetic.emb1", "binary")
    print(f"wrote {HERE / 'synthetic.emb1'} ({store.n_rows} rows, {store.n_dims} dims)")


if __name__ == "__main__":
    main()
