import uvicorn

from swap_nas.main import app  # noqa: F401

if __name__ == "__main__":
    uvicorn.run("main:app", host="127.0.0.1", port=8000)
