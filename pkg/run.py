import uvicorn

from eigenwkb.config import settings

if __name__ == "__main__":
    uvicorn.run("eigenwkb.main:app", host=settings.API_HOST, port=settings.API_PORT,
                reload=settings.API_RELOAD, log_level=settings.LOG_LEVEL.lower())
