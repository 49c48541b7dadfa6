"""guidedog: dialog-driven indoor navigation for a robotic guide dog.

Core pieces: a semantic polygon map (world), a cost-minimizing task planner
(planner), the dialog engine with plan verbalization and a safeguard
(dialog), chat backends and a simulated handler (llm), character noise
(noise), the service-task library (library), trajectory execution with
scene verbalization (simulator), baseline dialog policies (baselines), the
evaluation harness (harness), and a FastAPI session service (service).
"""

__version__ = "0.1.0"
