"""Exercise the HTTP session API end to end, in process.

Builds a catalog, mounts the FastAPI app on a test client, and walks a
session through create / feedback / metrics / end, printing each payload.
For a real server use: designloop serve --catalog DIR --port 8000

Run: python demos/04_live_service.py
"""

import json

from fastapi.testclient import TestClient

from designloop import generate_catalog
from designloop.service import create_app


def main() -> None:
    catalog = generate_catalog(size=300, image_size=(128, 128), seed=9)
    app = create_app({"demo": catalog})
    client = TestClient(app)

    session = client.post("/sessions", json={"strategy": "everything", "seed": 31}).json()
    sid = session["session_id"]
    print(f"created session {sid} (seed echoed: {session['seed']})")
    print(f"round 1 proposals: {[p['id'] for p in session['proposals'][:6]]} …")

    for rnd in range(1, 4):
        view = client.get(f"/sessions/{sid}").json()
        picks = [p["id"] for p in view["proposals"][:rnd]]  # pretend the user liked a few
        nxt = client.post(
            f"/sessions/{sid}/feedback", json={"selected": picks, "round": rnd}
        ).json()
        print(f"submitted round {rnd} with {len(picks)} likes -> now at round {nxt['round']}")

    metrics = client.get(f"/sessions/{sid}/metrics").json()
    print("per-round metrics:", json.dumps(metrics, indent=2))

    image = client.get(f"/designs/{session['proposals'][0]['id']}/image")
    print(f"design image: {len(image.content)} PNG bytes")

    transcript = client.delete(f"/sessions/{sid}").json()
    print(f"ended; transcript covers {len(transcript['rounds'])} rounds "
          f"and replays in the bench harness via its seed {transcript['seed']}")


if __name__ == "__main__":
    main()
