"""Run the results browser."""
import logging

import uvicorn

from config import LOG_LEVEL, WEB_HOST, WEB_PORT
from database import init_db

if __name__ == "__main__":
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    init_db()
    uvicorn.run("webapp.main:app", host=WEB_HOST, port=WEB_PORT, reload=False)
