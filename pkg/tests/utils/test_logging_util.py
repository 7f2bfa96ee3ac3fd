import json

from src.app.utils.logging_util import setup_logger


def test_json_lines_without_duplicate_handlers(tmp_path):
    logger = setup_logger("slope_lab.test", "test.log", log_dir=str(tmp_path))
    again = setup_logger("slope_lab.test", "test.log", log_dir=str(tmp_path))
    assert again is logger
    assert len(logger.handlers) == 1

    logger.info("band empty", extra={"rho": 0.5})
    try:
        raise ValueError("steps < 2")
    except ValueError:
        logger.exception("estimate failed")
    for handler in logger.handlers:
        handler.flush()

    lines = (tmp_path / "test.log").read_text(encoding="utf-8").splitlines()
    first, second = (json.loads(line) for line in lines)
    assert first["message"] == "band empty"
    assert first["extra"] == {"rho": 0.5}
    assert first["level"] == "INFO"
    assert "ValueError: steps < 2" in second["exception"]

    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
