"""Run the service: ``python -m embed_service`` (PORT env, default 8000)."""

import os

import uvicorn

from embed_service.app import create_app


def main():
    port = int(os.environ.get("PORT", "8000"))
    uvicorn.run(create_app(), host="0.0.0.0", port=port)


if __name__ == "__main__":
    main()
