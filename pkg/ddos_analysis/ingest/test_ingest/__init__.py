import os

DATA_PATH = os.path.abspath(os.path.dirname(__file__))

EVENTS_FILE = os.path.join(DATA_PATH, "sample_events.csv")

MALFORMED_EVENTS_FILE = os.path.join(DATA_PATH, "malformed_events.csv")
