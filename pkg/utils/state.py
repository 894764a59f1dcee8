from concurrent.futures import ThreadPoolExecutor
from typing import *

g_pool: ThreadPoolExecutor | None = None
g_threads: int = 1


def init_pool(threads: int = 1):
    global g_pool, g_threads
    if g_pool is not None:
        g_pool.shutdown(wait=True)
    g_threads = max(1, threads)
    g_pool = ThreadPoolExecutor(max_workers=g_threads, thread_name_prefix="trial")


def get_pool() -> ThreadPoolExecutor:
    if g_pool is None:
        init_pool(g_threads)
    return g_pool


def shutdown_pool():
    global g_pool
    if g_pool is not None:
        g_pool.shutdown(wait=True)
        g_pool = None
