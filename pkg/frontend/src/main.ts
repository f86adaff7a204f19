import { PlannerApi } from "./api";
import { mountApp } from "./app";
import "./style.css";

const baseUrl = import.meta.env.VITE_API_URL ?? "http://127.0.0.1:8800";
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
const store = mountApp(root, new PlannerApi(baseUrl));
void store.createSession();
