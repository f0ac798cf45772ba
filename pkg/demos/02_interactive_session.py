"""Drive an exploration session by hand with a scripted user.

A simulated user who likes thin bottles interacts with the combined
proposal strategy; the script prints per-round selections and batch
metrics, then replays the transcript to show reproducibility.

Run: python demos/02_interactive_session.py
"""

from designloop import (
    TASKS,
    assign_labels,
    calibrate_thresholds,
    create_session,
    end_session,
    generate_catalog,
    replay_transcript,
    simulated_select,
    submit_feedback,
)
from designloop.imaging import EmbeddingStore


def main() -> None:
    catalog = generate_catalog(size=1200, image_size=(128, 128), seed=7)
    store = EmbeddingStore.build(catalog)

    task = TASKS["thin"]
    thresholds = calibrate_thresholds(task, catalog)
    labels = assign_labels(task, thresholds, catalog, run_seed=3)
    print(f"simulated user likes thin bottles "
          f"({100 * labels.labels.mean():.1f}% of this catalog)")

    state = create_session(catalog, strategy="everything", seed=11, store=store)
    for _ in range(8):
        picks = simulated_select(labels, state.current_proposals)
        submit_feedback(state, picks)
        rec = state.history[-1]
        auc = f"{rec.batch_auc:.3f}" if rec.batch_auc is not None else "  -  "
        loss = f"{rec.log_loss:.3f}" if rec.log_loss is not None else "  -  "
        print(f"round {rec.round:2d}: selected {rec.num_selected:2d}/18, "
              f"batch AUC {auc}, log loss {loss}")

    transcript = end_session(state)
    print(f"\ntranscript: {len(transcript['rounds'])} rounds, "
          f"{sum(transcript['labels'].values())} designs liked")

    replay_transcript(catalog, transcript, store=store)
    print("replay from seed reproduced every proposal and metric bit-exactly")


if __name__ == "__main__":
    main()
