import logging

from arssn_common.logging import LOGGING_FORMAT, add_filelogger


def test_add_filelogger(tmp_path):
    log_file = tmp_path / "run.log"
    handler = add_filelogger(log_file, "debug", logger_name="arssn_test")
    try:
        assert handler.level == logging.DEBUG
        assert handler.formatter._fmt == LOGGING_FORMAT  # type: ignore[union-attr]

        logger = logging.getLogger("arssn_test")
        logger.setLevel(logging.DEBUG)
        logger.debug("sample size %s", 17)
        handler.flush()
    finally:
        logging.getLogger("arssn_test").removeHandler(handler)
        handler.close()

    content = log_file.read_text()
    assert "[DEBUG] arssn_test: sample size 17" in content


def test_add_filelogger_appends(tmp_path):
    log_file = tmp_path / "run.log"
    log_file.write_text("earlier run\n")
    handler = add_filelogger(log_file, "INFO", logger_name="arssn_append")
    try:
        logging.getLogger("arssn_append").setLevel(logging.INFO)
        logging.getLogger("arssn_append").info("later run")
    finally:
        logging.getLogger("arssn_append").removeHandler(handler)
        handler.close()

    lines = log_file.read_text().splitlines()
    assert lines[0] == "earlier run"
    assert lines[-1].endswith("later run")
