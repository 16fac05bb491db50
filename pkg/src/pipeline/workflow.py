"""LangGraph orchestration of the prepare -> train -> run pipeline"""

import logging
from typing import Any, Callable, Dict, List, TypedDict

from langgraph.graph import END, StateGraph

from src.config import ExperimentConfig
from src.exceptions import PipelineError
from src.pipeline.stages import cmd_prepare, cmd_run, cmd_train


class ExperimentState(TypedDict, total=False):
    """State schema for the experiment workflow"""
    # Stage outputs
    prepare_result: Dict[str, Any]
    train_result: Dict[str, Any]
    run_result: Dict[str, Any]

    # Workflow metadata
    current_step: str
    errors: List[str]


class ExperimentWorkflow:
    """Runs the experiment stages in order and stops at the first failure"""

    def __init__(self, config: ExperimentConfig):
        logging.info("Initializing experiment workflow...")
        self.config = config
        self.graph = self._build_graph()
        logging.info("Workflow initialized successfully")

    def _build_graph(self):
        workflow = StateGraph(ExperimentState)

        workflow.add_node("prepare", self._stage_node("prepare", "prepare_result", cmd_prepare))
        workflow.add_node("train", self._stage_node("train", "train_result", cmd_train))
        workflow.add_node("simulate", self._stage_node("simulate", "run_result", cmd_run))

        workflow.set_entry_point("prepare")
        workflow.add_conditional_edges("prepare", self._route, {"continue": "train", "stop": END})
        workflow.add_conditional_edges("train", self._route, {"continue": "simulate", "stop": END})
        workflow.add_edge("simulate", END)

        return workflow.compile()

    @staticmethod
    def _route(state: ExperimentState) -> str:
        return "stop" if state.get("errors") else "continue"

    def _stage_node(self, name: str, key: str,
                    stage: Callable[[ExperimentConfig], Dict[str, Any]]) -> Callable[[ExperimentState], Dict[str, Any]]:
        def node(state: ExperimentState) -> Dict[str, Any]:
            logging.info(f"Stage {name}...")
            try:
                return {key: stage(self.config), "current_step": f"{name}_complete"}
            except Exception as e:
                logging.error(f"Error in {name}: {e}")
                return {
                    "current_step": f"{name}_failed",
                    "errors": state.get("errors", []) + [f"{name}: {e}"],
                }
        return node

    def invoke(self) -> Dict[str, Any]:
        """Execute the workflow; raises PipelineError if a stage failed"""
        logging.info(f"Starting experiment pipeline for {self.config.dataset.name}")
        initial_state: ExperimentState = {"current_step": "started", "errors": []}

        final_state = self.graph.invoke(initial_state)
        if final_state.get("errors"):
            raise PipelineError(
                f"Pipeline stopped at {final_state.get('current_step')}: {'; '.join(final_state['errors'])}"
            )

        logging.info("Pipeline completed successfully")
        return final_state


def create_workflow(config: ExperimentConfig) -> ExperimentWorkflow:
    """
    Factory function to create workflow instance
    """
    return ExperimentWorkflow(config)
