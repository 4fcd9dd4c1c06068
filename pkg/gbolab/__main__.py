from gbolab.index import run

run()
