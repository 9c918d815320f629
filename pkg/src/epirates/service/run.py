"""Launcher for the HTTP service: `epirates-serve [--host H] [--port P]`."""

import argparse

import uvicorn


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="epirates-serve",
                                     description="Run the epirates HTTP service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args(argv)
    uvicorn.run("epirates.service.app:app", host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
